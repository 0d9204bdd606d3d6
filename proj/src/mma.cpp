#include "tofsi/mma.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace tofsi {

namespace {

constexpr double kAlbefa = 0.1;
constexpr double kRaa0 = 1e-5;

struct AsymptoteState {
  std::vector<double> low, upp;
};

// Standard asymptote adaptation: expand while the variable keeps moving the
// same way, contract when it oscillates.
AsymptoteState advance_asymptotes(int iter, std::span<const double> x,
                                  std::span<const double> xold1,
                                  std::span<const double> xold2,
                                  const std::vector<double>& low_prev,
                                  const std::vector<double>& upp_prev,
                                  const MmaSettings& st) {
  const int n = static_cast<int>(x.size());
  AsymptoteState a;
  a.low.resize(n);
  a.upp.resize(n);
  for (int j = 0; j < n; ++j) {
    if (iter <= 2) {
      a.low[j] = x[j] - st.asy_init;
      a.upp[j] = x[j] + st.asy_init;
    } else {
      const double zzz = (x[j] - xold1[j]) * (xold1[j] - xold2[j]);
      double factor = 1.0;
      if (zzz > 0) factor = st.asy_incr;
      if (zzz < 0) factor = st.asy_decr;
      a.low[j] = x[j] - factor * (xold1[j] - low_prev[j]);
      a.upp[j] = x[j] + factor * (upp_prev[j] - xold1[j]);
      a.low[j] = std::clamp(a.low[j], x[j] - 10.0, x[j] - 0.01);
      a.upp[j] = std::clamp(a.upp[j], x[j] + 0.01, x[j] + 10.0);
    }
  }
  return a;
}

MmaSubproblem make_subproblem(int iter, std::span<const double> x,
                              std::span<const double> xold1,
                              std::span<const double> xold2,
                              const std::vector<double>& low_prev,
                              const std::vector<double>& upp_prev,
                              int n_obj,
                              std::span<const double> row_values,
                              const std::vector<std::vector<double>>& row_grads,
                              const MmaSettings& st) {
  const int n = static_cast<int>(x.size());
  const int m = static_cast<int>(row_values.size());
  AsymptoteState asy =
      advance_asymptotes(iter, x, xold1, xold2, low_prev, upp_prev, st);

  MmaSubproblem sub;
  sub.low = asy.low;
  sub.upp = asy.upp;
  sub.alfa.resize(n);
  sub.beta.resize(n);
  sub.p.assign(m, std::vector<double>(n, 0.0));
  sub.q.assign(m, std::vector<double>(n, 0.0));
  sub.b.assign(m, 0.0);
  sub.a.assign(m, 0.0);
  sub.c.assign(m, st.constraint_penalty);
  sub.d.assign(m, 1.0);
  for (int i = 0; i < n_obj; ++i) sub.a[i] = 1.0;

  for (int j = 0; j < n; ++j) {
    sub.alfa[j] = std::max({sub.low[j] + kAlbefa * (x[j] - sub.low[j]),
                            x[j] - st.move_limit, 0.0});
    sub.beta[j] = std::min({sub.upp[j] - kAlbefa * (sub.upp[j] - x[j]),
                            x[j] + st.move_limit, 1.0});
  }
  for (int i = 0; i < m; ++i) {
    double bi = -row_values[i];
    for (int j = 0; j < n; ++j) {
      const double ux = sub.upp[j] - x[j];
      const double xl = x[j] - sub.low[j];
      const double gp = std::max(row_grads[i][j], 0.0);
      const double gm = std::max(-row_grads[i][j], 0.0);
      const double reg = 0.001 * (gp + gm) + kRaa0;
      sub.p[i][j] = (1.0 * gp + reg) * ux * ux;
      sub.q[i][j] = (1.0 * gm + reg) * xl * xl;
      bi += sub.p[i][j] / ux + sub.q[i][j] / xl;
    }
    sub.b[i] = bi;
  }
  return sub;
}

// Primal-dual interior point solution of the separable subproblem.
std::vector<double> subsolve(const MmaSubproblem& sub, double epsimin) {
  const int n = static_cast<int>(sub.alfa.size());
  const int m = static_cast<int>(sub.b.size());
  using Vec = Eigen::VectorXd;

  Vec x(n), xsi(n), eta(n);
  Vec y = Vec::Ones(m), lam = Vec::Ones(m), mu(m), s = Vec::Ones(m);
  double z = 1.0, zet = 1.0;
  for (int j = 0; j < n; ++j) {
    x[j] = 0.5 * (sub.alfa[j] + sub.beta[j]);
    xsi[j] = std::max(1.0, 1.0 / (x[j] - sub.alfa[j]));
    eta[j] = std::max(1.0, 1.0 / (sub.beta[j] - x[j]));
  }
  for (int i = 0; i < m; ++i) mu[i] = std::max(1.0, 0.5 * sub.c[i]);

  auto gvec = [&](const Vec& xx, Vec& g, Vec& plam_out, Vec& qlam_out) {
    g.setZero(m);
    plam_out.setZero(n);
    qlam_out.setZero(n);
    for (int j = 0; j < n; ++j) {
      const double uxinv = 1.0 / (sub.upp[j] - xx[j]);
      const double xlinv = 1.0 / (xx[j] - sub.low[j]);
      for (int i = 0; i < m; ++i) {
        g[i] += sub.p[i][j] * uxinv + sub.q[i][j] * xlinv;
        plam_out[j] += lam[i] * sub.p[i][j];
        qlam_out[j] += lam[i] * sub.q[i][j];
      }
    }
  };

  auto residual_norm = [&](const Vec& xx, const Vec& yy, double zz,
                           const Vec& ll, const Vec& xs, const Vec& et,
                           const Vec& m_, double zt, const Vec& ss,
                           double epsi, double* max_out) {
    Vec g(m), plam(n), qlam(n);
    g.setZero();
    plam.setZero();
    qlam.setZero();
    for (int j = 0; j < n; ++j) {
      const double uxinv = 1.0 / (sub.upp[j] - xx[j]);
      const double xlinv = 1.0 / (xx[j] - sub.low[j]);
      for (int i = 0; i < m; ++i) {
        g[i] += sub.p[i][j] * uxinv + sub.q[i][j] * xlinv;
        plam[j] += ll[i] * sub.p[i][j];
        qlam[j] += ll[i] * sub.q[i][j];
      }
    }
    double sq = 0.0, mx = 0.0;
    auto acc = [&](double v) {
      sq += v * v;
      mx = std::max(mx, std::abs(v));
    };
    for (int j = 0; j < n; ++j) {
      const double ux = sub.upp[j] - xx[j];
      const double xl = xx[j] - sub.low[j];
      acc(plam[j] / (ux * ux) - qlam[j] / (xl * xl) - xs[j] + et[j]);
      acc(xs[j] * (xx[j] - sub.alfa[j]) - epsi);
      acc(et[j] * (sub.beta[j] - xx[j]) - epsi);
    }
    double alam = 0.0;
    for (int i = 0; i < m; ++i) {
      acc(sub.c[i] + sub.d[i] * yy[i] - m_[i] - ll[i]);
      acc(g[i] - sub.a[i] * zz - yy[i] + ss[i] - sub.b[i]);
      acc(m_[i] * yy[i] - epsi);
      acc(ll[i] * ss[i] - epsi);
      alam += sub.a[i] * ll[i];
    }
    acc(sub.a0 - zt - alam);
    acc(zt * zz - epsi);
    if (max_out) *max_out = mx;
    return std::sqrt(sq);
  };

  double epsi = 1.0;
  while (epsi > epsimin) {
    double resmax = 0.0;
    double resnorm =
        residual_norm(x, y, z, lam, xsi, eta, mu, zet, s, epsi, &resmax);
    int ittt = 0;
    while (resmax > 0.9 * epsi && ittt < 200) {
      ++ittt;
      Vec g(m), plam(n), qlam(n);
      gvec(x, g, plam, qlam);

      Vec delx(n), diagx(n);
      for (int j = 0; j < n; ++j) {
        const double ux = sub.upp[j] - x[j];
        const double xl = x[j] - sub.low[j];
        delx[j] = plam[j] / (ux * ux) - qlam[j] / (xl * xl) -
                  epsi / (x[j] - sub.alfa[j]) + epsi / (sub.beta[j] - x[j]);
        diagx[j] = 2.0 * (plam[j] / (ux * ux * ux) + qlam[j] / (xl * xl * xl)) +
                   xsi[j] / (x[j] - sub.alfa[j]) + eta[j] / (sub.beta[j] - x[j]);
      }
      Vec dely(m), dellam(m), diagy(m), diaglamyi(m);
      double delz = sub.a0 - epsi / z;
      for (int i = 0; i < m; ++i) {
        dely[i] = sub.c[i] + sub.d[i] * y[i] - lam[i] - epsi / y[i];
        delz -= sub.a[i] * lam[i];
        dellam[i] = g[i] - sub.a[i] * z - y[i] - sub.b[i] + epsi / lam[i];
        diagy[i] = sub.d[i] + mu[i] / y[i];
        diaglamyi[i] = s[i] / lam[i] + 1.0 / diagy[i];
      }

      // GG(i,j) = dg_i/dx_j
      Eigen::MatrixXd gg(m, n);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
          const double ux = sub.upp[j] - x[j];
          const double xl = x[j] - sub.low[j];
          gg(i, j) = sub.p[i][j] / (ux * ux) - sub.q[i][j] / (xl * xl);
        }

      // reduced (m+1) x (m+1) system for (dlam, dz)
      Eigen::MatrixXd aa(m + 1, m + 1);
      Eigen::VectorXd bb(m + 1);
      Eigen::MatrixXd ggd = gg;  // GG * diag(1/diagx)
      for (int j = 0; j < n; ++j) ggd.col(j) /= diagx[j];
      aa.topLeftCorner(m, m) = ggd * gg.transpose();
      for (int i = 0; i < m; ++i) aa(i, i) += diaglamyi[i];
      for (int i = 0; i < m; ++i) {
        aa(i, m) = sub.a[i];
        aa(m, i) = sub.a[i];
      }
      aa(m, m) = -zet / z;
      bb.head(m) = dellam + dely.cwiseQuotient(diagy) - ggd * delx;
      bb(m) = delz;
      Eigen::VectorXd sol = aa.lu().solve(bb);
      Vec dlam = sol.head(m);
      const double dz = sol(m);

      Vec dx = -(delx + gg.transpose() * dlam).cwiseQuotient(diagx);
      Vec dy = (-dely + dlam).cwiseQuotient(diagy);
      Vec dxsi(n), deta(n), dmu(m), ds(m);
      for (int j = 0; j < n; ++j) {
        dxsi[j] = -xsi[j] + (epsi - xsi[j] * dx[j]) / (x[j] - sub.alfa[j]);
        deta[j] = -eta[j] + (epsi + eta[j] * dx[j]) / (sub.beta[j] - x[j]);
      }
      for (int i = 0; i < m; ++i) {
        dmu[i] = -mu[i] + (epsi - mu[i] * dy[i]) / y[i];
        ds[i] = -s[i] + (epsi - s[i] * dlam[i]) / lam[i];
      }
      const double dzet = -zet + (epsi - zet * dz) / z;

      double stmax = 1.0;
      auto grow = [&](double dv, double v) {
        stmax = std::max(stmax, -1.01 * dv / v);
      };
      for (int i = 0; i < m; ++i) {
        grow(dy[i], y[i]);
        grow(dlam[i], lam[i]);
        grow(dmu[i], mu[i]);
        grow(ds[i], s[i]);
      }
      grow(dz, z);
      grow(dzet, zet);
      for (int j = 0; j < n; ++j) {
        grow(dxsi[j], xsi[j]);
        grow(deta[j], eta[j]);
        grow(dx[j], x[j] - sub.alfa[j]);
        grow(-dx[j], sub.beta[j] - x[j]);
      }
      double steg = 1.0 / stmax;

      const Vec xo = x, yo = y, lo = lam, xso = xsi, eto = eta, muo = mu,
                so = s;
      const double zo = z, zeto = zet;
      double newnorm = 2.0 * resnorm;
      int itto = 0;
      while (newnorm > resnorm && itto < 50) {
        ++itto;
        x = xo + steg * dx;
        y = yo + steg * dy;
        z = zo + steg * dz;
        lam = lo + steg * dlam;
        xsi = xso + steg * dxsi;
        eta = eto + steg * deta;
        mu = muo + steg * dmu;
        zet = zeto + steg * dzet;
        s = so + steg * ds;
        newnorm = residual_norm(x, y, z, lam, xsi, eta, mu, zet, s, epsi,
                                &resmax);
        steg *= 0.5;
      }
      resnorm = newnorm;
    }
    epsi *= 0.1;
  }
  return std::vector<double>(x.data(), x.data() + n);
}

}  // namespace

MmaSolver::MmaSolver(int n, int n_objectives, int n_constraints)
    : n_(n), n_obj_(n_objectives), n_con_(n_constraints) {
  low_.assign(n, 0.0);
  upp_.assign(n, 1.0);
  xold1_.assign(n, 0.0);
  xold2_.assign(n, 0.0);
}

std::vector<double> MmaSolver::update(
    std::span<const double> x, std::span<const double> row_values,
    const std::vector<std::vector<double>>& row_grads,
    const MmaSettings& settings) {
  settings.validate();
  if (static_cast<int>(x.size()) != n_ ||
      static_cast<int>(row_values.size()) != n_obj_ + n_con_)
    throw ConfigError("mma dimensions do not match");
  ++iter_;
  MmaSubproblem sub =
      make_subproblem(iter_, x, xold1_, xold2_, low_, upp_, n_obj_, row_values,
                      row_grads, settings);
  low_ = sub.low;
  upp_ = sub.upp;
  xold2_ = xold1_;
  xold1_.assign(x.begin(), x.end());
  return subsolve(sub, settings.dual_tol);
}

double MmaSubproblem::row_value(int row, std::span<const double> x) const {
  double v = -b[row];
  for (std::size_t j = 0; j < x.size(); ++j)
    v += p[row][j] / (upp[j] - x[j]) + q[row][j] / (x[j] - low[j]);
  return v;
}

double MmaSubproblem::outer_cost(std::span<const double> x) const {
  const int m = static_cast<int>(b.size());
  std::vector<double> g(m);
  for (int i = 0; i < m; ++i) g[i] = row_value(i, x);
  // exact inner minimization over z >= 0 (y_i = max(0, g_i - a_i z))
  auto cost_z = [&](double z) {
    double v = a0 * z;
    for (int i = 0; i < m; ++i) {
      const double y = std::max(0.0, g[i] - a[i] * z);
      v += c[i] * y + 0.5 * d[i] * y * y;
    }
    return v;
  };
  double lo = 0.0, hi = 0.0;
  for (int i = 0; i < m; ++i)
    if (a[i] > 0) hi = std::max(hi, g[i] / a[i] + 1.0);
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (cost_z(m1) < cost_z(m2))
      hi = m2;
    else
      lo = m1;
  }
  return cost_z(0.5 * (lo + hi));
}

MmaSubproblem build_mma_subproblem(
    const MmaSolver& solver, int iter, int n_objectives,
    std::span<const double> x, std::span<const double> xold1,
    std::span<const double> xold2, std::span<const double> row_values,
    const std::vector<std::vector<double>>& row_grads,
    const MmaSettings& settings) {
  return make_subproblem(iter, x, xold1, xold2, solver.low(), solver.upp(),
                         n_objectives, row_values, row_grads, settings);
}

}  // namespace tofsi
