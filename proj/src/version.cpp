#include "confcycle/version.hpp"

#ifndef CONFCYCLE_CODE_VERSION
#define CONFCYCLE_CODE_VERSION "unknown"
#endif

namespace confcycle {

std::string_view code_version() { return CONFCYCLE_CODE_VERSION; }

} // namespace confcycle
