#include "gdsrec/diff/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace gdsrec::diff {

double finite_diff_check(const std::function<double()>& f,
                         std::span<Parameter* const> params, double h) {
  double worst = 0.0;
  for (Parameter* param : params) {
    for (Eigen::Index r = 0; r < param->value.rows(); ++r) {
      for (Eigen::Index c = 0; c < param->value.cols(); ++c) {
        const double saved = param->value(r, c);
        param->value(r, c) = saved + h;
        const double fp = f();
        param->value(r, c) = saved - h;
        const double fm = f();
        param->value(r, c) = saved;

        const double fd = (fp - fm) / (2.0 * h);
        const double an = param->grad(r, c);
        const double denom = std::max(std::abs(fd), std::abs(an));
        const double err = denom < 1e-6 ? std::abs(fd - an) : std::abs(fd - an) / denom;
        worst = std::max(worst, err);
      }
    }
  }
  return worst;
}

}  // namespace gdsrec::diff
