#pragma once

#include <string_view>

namespace mlsa {

/// git-describe style tag recorded at configure time, e.g. "v0.1.0-g1a2b3c4".
std::string_view build_tag() noexcept;

}  // namespace mlsa
