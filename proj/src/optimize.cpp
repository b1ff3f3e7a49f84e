#include "selgauss/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace selgauss {

double BestTracker::operator()(const Eigen::VectorXd& x) {
  const double v = f_(x);
  ++evals_;
  if (v < best_f_) {
    best_f_ = v;
    best_x_ = x;
  }
  return v;
}

OptResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                      const NelderMeadOptions& opt) {
  const Eigen::Index n = x0.size();
  const int m = static_cast<int>(n) + 1;
  std::vector<Eigen::VectorXd> xs(m, x0);
  std::vector<double> fs(m);
  int evals = 0;
  for (int i = 1; i < m; ++i) xs[i][i - 1] += step[i - 1];
  for (int i = 0; i < m; ++i) {
    fs[i] = f(xs[i]);
    ++evals;
  }
  std::vector<int> ord(m);

  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
  int it = 0;
  for (; it < opt.max_iters; ++it) {
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    if (opt.f_tol > 0 && fs[ord.back()] - fs[ord.front()] < opt.f_tol) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int k = 0; k + 1 < m; ++k) centroid += xs[ord[k]];
    centroid /= static_cast<double>(n);
    const int worst = ord.back();

    const Eigen::VectorXd xr = centroid + alpha * (centroid - xs[worst]);
    const double fr = f(xr);
    ++evals;
    if (fr < fs[ord[0]]) {
      const Eigen::VectorXd xe = centroid + gamma * (centroid - xs[worst]);
      const double fe = f(xe);
      ++evals;
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
      continue;
    }
    if (fr < fs[ord[m - 2]]) {
      xs[worst] = xr;
      fs[worst] = fr;
      continue;
    }
    const Eigen::VectorXd xc = centroid + rho * (xs[worst] - centroid);
    const double fc = f(xc);
    ++evals;
    if (fc < fs[worst]) {
      xs[worst] = xc;
      fs[worst] = fc;
      continue;
    }
    for (int k = 1; k < m; ++k) {
      xs[ord[k]] = xs[ord[0]] + sigma * (xs[ord[k]] - xs[ord[0]]);
      fs[ord[k]] = f(xs[ord[k]]);
      ++evals;
    }
  }
  int best = 0;
  for (int i = 1; i < m; ++i)
    if (fs[i] < fs[best]) best = i;
  OptResult r;
  r.x = xs[best];
  r.f = fs[best];
  r.iters = it;
  r.evals = evals;
  r.converged = true;
  return r;
}

namespace {

Eigen::VectorXd central_gradient(const Objective& f, const Eigen::VectorXd& x, double h, int* evals) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    xp[i] = xi + h;
    const double fp = f(xp);
    xp[i] = xi - h;
    const double fm = f(xp);
    xp[i] = xi;
    g[i] = (fp - fm) / (2 * h);
    *evals += 2;
  }
  return g;
}

}  // namespace

OptResult quasi_newton(const Objective& f, const Eigen::VectorXd& x0, const QuasiNewtonOptions& opt) {
  const Eigen::Index n = x0.size();
  Eigen::VectorXd x = x0;
  double fx = f(x);
  int evals = 1;
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd g = central_gradient(f, x, opt.grad_step, &evals);

  OptResult r;
  r.converged = false;
  int it = 0;
  for (; it < opt.max_iters; ++it) {
    Eigen::VectorXd dir = -h_inv * g;
    if (dir.dot(g) >= 0) dir = -g;  // reset on loss of descent direction

    double t = 1.0;
    const double slope = g.dot(dir);
    double f_new = fx;
    Eigen::VectorXd x_new = x;
    bool moved = false;
    for (int ls = 0; ls < 25; ++ls) {
      x_new = x + t * dir;
      f_new = f(x_new);
      ++evals;
      if (f_new <= fx + 1e-4 * t * slope) {
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;

    const Eigen::VectorXd s = x_new - x;
    if (s.cwiseAbs().maxCoeff() < opt.param_tol) {
      x = x_new;
      fx = f_new;
      r.converged = true;
      break;
    }
    Eigen::VectorXd g_new = central_gradient(f, x_new, opt.grad_step, &evals);
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const Eigen::VectorXd hy = h_inv * y;
      const double yhy = y.dot(hy);
      h_inv += ((sy + yhy) / (sy * sy)) * (s * s.transpose());
      h_inv -= (hy * s.transpose() + s * hy.transpose()) / sy;
    }
    x = x_new;
    fx = f_new;
    g = g_new;
  }
  r.x = x;
  r.f = fx;
  r.iters = it;
  r.evals = evals;
  return r;
}

}  // namespace selgauss
