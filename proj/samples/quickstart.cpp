// Fit a single index on simulated data and read off a prediction interval.

#include "sicdf/anw.hpp"
#include "sicdf/bandwidth.hpp"
#include "sicdf/criterion.hpp"
#include "sicdf/fit.hpp"
#include "sicdf/simulation.hpp"

#include <cstdio>

int main()
{
  sicdf::Rng rng(sicdf::derive_seed(42, sicdf::Stream::data));
  const auto [data, truth] = sicdf::gen_example1(200, rng);

  const sicdf::SphereSet spheres = sicdf::make_sphere_grid(-1.5, 1.5, 5, data.dim(), 1.0);
  const double h = 0.3;
  const sicdf::ThetaFit fit = sicdf::fit_theta(data, spheres, h, std::nullopt, {}, 42);

  const auto grid = sicdf::BandwidthGrid::geometric(0.1, 1.2, 15);
  const double H = sicdf::select_H(data, fit.theta, grid, 20, 42).value;

  std::printf("theta_hat =");
  for (double c : fit.theta.components()) {
    std::printf(" %.4f", c);
  }
  std::printf("\ninner product with truth = %.4f, criterion = %.6f, H = %.4f\n",
              sicdf::dot(fit.theta.components(), truth.components()), fit.criterion, H);

  const std::vector<double> x{0.5, -0.2, 1.0, 0.3};
  const sicdf::PredictionInterval pi = sicdf::prediction_interval(data, fit.theta, H, x, 0.1);
  std::printf("90%% interval at x: [%.3f, %.3f], true conditional median %.3f\n", pi.lower,
              pi.upper, sicdf::dot(truth.components(), x));
}
