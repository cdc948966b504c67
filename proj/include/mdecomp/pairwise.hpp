#pragma once

#include <cstddef>

#include "mdecomp/embedding.hpp"

namespace mdecomp {

/// Mean of 1 - cos over all |a|*|b| cross pairs. Rows must be unit vectors.
/// Reduction order is fixed (row chunks of `a`, merged in order), so the
/// result does not depend on the thread count. Throws EmptyCategory if either side is empty.
double mean_cross_cosine_distance(const UnitRows& a, const UnitRows& b);

/// Mean of 1 - cos over the |a|(|a|-1)/2 unordered distinct pairs; self-pairs
/// are excluded. Throws InsufficientData for fewer than 2 rows.
double mean_within_cosine_distance(const UnitRows& a);

}  // namespace mdecomp
