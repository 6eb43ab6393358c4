#pragma once

#include <cmath>
#include <vector>

#include "accrete/error.hpp"

namespace accrete {

template <class Density>
TailFit tail_exponent_of(Density&& density, double n_lo, double n_hi, std::size_t points) {
  if (!(n_lo > 0.0) || !(n_hi > n_lo) || points < 3) {
    throw Error(ErrorKind::Domain, "tail_exponent: need 0 < n_lo < n_hi and >= 3 points");
  }
  std::vector<double> x, y;
  const double step = std::log(n_hi / n_lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double n = n_lo * std::exp(step * static_cast<double>(i));
    const double p = density(n);
    if (!(p > 0.0)) {
      throw Error(ErrorKind::Domain, "tail_exponent: density vanishes inside the window");
    }
    x.push_back(std::log(n));
    y.push_back(std::log(p));
  }
  const LinearFit line = fit_line(x, y);
  return {line.slope, line.r_squared};
}

}  // namespace accrete
