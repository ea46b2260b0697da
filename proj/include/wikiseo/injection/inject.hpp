#pragma once

#include <cstdint>

#include "wikiseo/injection/labels.hpp"

namespace wikiseo::injection {

/// Grafts the promotional content onto one seeded-uniform eligible site:
/// a REPLACEMENT span is replaced by it, an INSERTION token is followed by
/// "in <promo>". Throws InfeasibleError when no site is eligible.
corpus::Paragraph inject(const InjectionInputs& in, const TagSequence& tags, std::uint64_t seed);

}  // namespace wikiseo::injection
