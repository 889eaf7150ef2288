#pragma once

#include <doctest.h>

// doctest's Approx adds an absolute floor of epsilon * 1.0, which makes it
// meaningless for SI-sized values. This is a purely relative comparison.
inline doctest::Approx rel(double value) { return doctest::Approx(value).scale(0.0); }
