#pragma once

#include <functional>
#include <span>

#include "gdsrec/diff/tape.hpp"

namespace gdsrec::diff {

// Central-difference verification of the gradients currently stored in each
// parameter's grad member. `f` must re-evaluate the loss from the parameters'
// current values and be deterministic. Each coordinate is perturbed by +/- h;
// the error per coordinate is relative where either gradient has magnitude
// above 1e-6 and absolute below that. Returns the max error over all
// coordinates. Parameter values are restored on exit.
double finite_diff_check(const std::function<double()>& f,
                         std::span<Parameter* const> params, double h = 1e-5);

}  // namespace gdsrec::diff
