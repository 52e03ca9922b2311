#pragma once

#include "fflmpi/core.hpp"

namespace fflmpi {

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Normalized 2D Gaussian window.
Matrix gaussian_window(int size, double sigma);

/// Mean SSIM over all fully contained window positions (valid region) with
/// constants (k1 range)^2 and (k2 range)^2.
double ssim(const Matrix& a, const Matrix& b, double dynamic_range, const SsimOptions& options = {});
/// Dynamic range taken from the reference image as max - min.
double ssim(const ImageGrid& reference, const ImageGrid& test, const SsimOptions& options = {});

/// |a - b|_2 / |b|_2.
double rel_l2(const Matrix& a, const Matrix& b);
double rel_l2(const ImageGrid& a, const ImageGrid& b);

struct MetricReport {
  double ssim = 0.0;
  double rel_l2 = 0.0;
  double max_abs_error = 0.0;
};

MetricReport compare_images(const ImageGrid& reference, const ImageGrid& test);

}  // namespace fflmpi
