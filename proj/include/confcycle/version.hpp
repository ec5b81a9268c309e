#pragma once

#include <string_view>

namespace confcycle {

/// Source revision the binary was built from ("unknown" outside a git checkout).
std::string_view code_version();

} // namespace confcycle
