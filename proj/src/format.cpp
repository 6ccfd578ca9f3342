#include "bigbatch/format.hpp"

#include <cstdio>

namespace bigbatch {

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace bigbatch
