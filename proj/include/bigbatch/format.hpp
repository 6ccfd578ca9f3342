#pragma once

#include <string>

namespace bigbatch {

// Shortest-round-trip decimal form (17 significant digits).
std::string format_g17(double v);

}  // namespace bigbatch
