#include "teamprod/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include "teamprod/errors.hpp"

namespace teamprod {

double chi2_upper_tail(double x, int dof) {
  if (dof < 1) throw InvalidInput("chi-square tail needs dof >= 1");
  if (std::isnan(x)) throw InvalidInput("chi-square tail of NaN");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

}  // namespace teamprod
