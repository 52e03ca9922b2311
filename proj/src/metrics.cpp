#include "fflmpi/metrics.hpp"

#include <cmath>

namespace fflmpi {

Matrix gaussian_window(int size, double sigma) {
  if (size < 1 || !(sigma > 0)) throw Error(ErrorKind::invalid_argument, "invalid SSIM window");
  Matrix w(size, size);
  const double c = 0.5 * (size - 1);
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j)
      w(i, j) = std::exp(-((i - c) * (i - c) + (j - c) * (j - c)) / (2 * sigma * sigma));
  return w / w.sum();
}

double ssim(const Matrix& a, const Matrix& b, double dynamic_range, const SsimOptions& options) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorKind::invalid_argument, "SSIM: image sizes differ");
  if (!(dynamic_range > 0)) throw Error(ErrorKind::invalid_argument, "SSIM: zero dynamic range");
  const int w = options.window;
  if (a.rows() < w || a.cols() < w) throw Error(ErrorKind::invalid_argument, "SSIM: image smaller than the window");
  const Matrix g = gaussian_window(w, options.sigma);
  const double c1 = std::pow(options.k1 * dynamic_range, 2);
  const double c2 = std::pow(options.k2 * dynamic_range, 2);

  const Matrix aa = a.cwiseProduct(a), bb = b.cwiseProduct(b), ab = a.cwiseProduct(b);
  double total = 0.0;
  const Index nr = a.rows() - w + 1, nc = a.cols() - w + 1;
  for (Index j = 0; j < nc; ++j) {
    for (Index i = 0; i < nr; ++i) {
      const double mu_a = g.cwiseProduct(a.block(i, j, w, w)).sum();
      const double mu_b = g.cwiseProduct(b.block(i, j, w, w)).sum();
      const double var_a = g.cwiseProduct(aa.block(i, j, w, w)).sum() - mu_a * mu_a;
      const double var_b = g.cwiseProduct(bb.block(i, j, w, w)).sum() - mu_b * mu_b;
      const double cov = g.cwiseProduct(ab.block(i, j, w, w)).sum() - mu_a * mu_b;
      total += ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
               ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
    }
  }
  return total / static_cast<double>(nr * nc);
}

double ssim(const ImageGrid& reference, const ImageGrid& test, const SsimOptions& options) {
  const double range = reference.values.maxCoeff() - reference.values.minCoeff();
  return ssim(reference.values, test.values, range, options);
}

double rel_l2(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorKind::invalid_argument, "rel_l2: sizes differ");
  const double ref = b.norm();
  if (!(ref > 0)) throw Error(ErrorKind::invalid_argument, "rel_l2: zero reference");
  return (a - b).norm() / ref;
}

double rel_l2(const ImageGrid& a, const ImageGrid& b) { return rel_l2(a.values, b.values); }

MetricReport compare_images(const ImageGrid& reference, const ImageGrid& test) {
  MetricReport r;
  r.ssim = ssim(reference, test);
  r.rel_l2 = rel_l2(test, reference);
  r.max_abs_error = (test.values - reference.values).cwiseAbs().maxCoeff();
  return r;
}

}  // namespace fflmpi
