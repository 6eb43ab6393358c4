#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace accrete {

/// Seconds since 1970-01-01T00:00:00Z.
using UnixSeconds = std::int64_t;

/// Parses `YYYY-MM-DDTHH:MM:SS` followed by `Z`, `+hh:mm`, `-hh:mm` or nothing
/// (taken as UTC). A space is accepted in place of `T`. Returns nullopt for
/// anything else, including out-of-range fields.
std::optional<UnixSeconds> parse_iso8601(std::string_view text);

/// Formats as `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_iso8601(UnixSeconds t);

}  // namespace accrete
