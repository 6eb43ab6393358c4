#pragma once

#include <cstdint>
#include <random>

namespace accrete {

using Rng = std::mt19937_64;

// Stream splitting: every independent consumer (the creation-time draw, each
// article, each article's editor assignment) gets its own generator seeded
// with splitmix64(seed ^ splitmix64(stream)). Results therefore do not depend
// on the order or thread in which the streams are consumed.
std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

// Stream tags. Article i uses kArticleStream + i, its editors kEditorStream + i.
inline constexpr std::uint64_t kCreationStream = 0;
inline constexpr std::uint64_t kArticleStream = 1;
inline constexpr std::uint64_t kEditorStream = std::uint64_t{1} << 40;
inline constexpr std::uint64_t kLabelStream = std::uint64_t{2} << 40;

}  // namespace accrete
