#pragma once

namespace xpci {

inline constexpr const char* version_string = "1.0.0";

// Bumped when the on-disk layout of fields, handles, sidecars or manifests
// changes incompatibly.
inline constexpr int format_version = 1;

}  // namespace xpci
