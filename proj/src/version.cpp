#include "mlsa/version.hpp"

#ifndef MLSA_BUILD_TAG
#define MLSA_BUILD_TAG "unknown"
#endif

namespace mlsa {

std::string_view build_tag() noexcept { return MLSA_BUILD_TAG; }

}  // namespace mlsa
