#pragma once

#include <functional>
#include <span>
#include <vector>

namespace teamprod {

struct NelderMeadOptions {
  int max_iterations = 4000;
  double x_tolerance = 1e-10;   // simplex diameter, relative to 1 + |x|
  double f_tolerance = 1e-15;   // spread of vertex values, absolute
  double f_rel_tolerance = 1e-12;
  std::vector<double> initial_step;  // per-coordinate; empty means 0.1
  int restarts = 1;                  // restart from the best vertex after convergence
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

// Derivative-free simplex minimization (reflection 1, expansion 2, contraction
// 1/2, shrink 1/2). Non-finite objective values are treated as +inf.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0,
                             const NelderMeadOptions& options = {});

}  // namespace teamprod
