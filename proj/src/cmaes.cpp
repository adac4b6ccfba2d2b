#include "inferum/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace inferum {

namespace {

constexpr double kSigmaMin = 1e-12;
constexpr double kSigmaMax = 1e6;
constexpr double kEigenFloorRatio = 1e-10;

void symmetrize(std::vector<double>& m, int d) {
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            double v = 0.5 * (m[i * d + j] + m[j * d + i]);
            m[i * d + j] = v;
            m[j * d + i] = v;
        }
}

// eig/basis of C with the eigenvalue floor applied; throws when C is beyond
// numerical rescue.
void decompose(const CmaState& s, std::vector<double>& eig, std::vector<double>& basis) {
    jacobi_eigen(s.cov, s.dim, eig, basis);
    double max_eig = *std::max_element(eig.begin(), eig.end());
    if (!std::isfinite(max_eig) || max_eig <= 0.0)
        throw degenerate_covariance_error("cma-es: covariance lost positive-definiteness");
    const double floor = kEigenFloorRatio * max_eig;
    for (double& e : eig) {
        if (!std::isfinite(e))
            throw degenerate_covariance_error("cma-es: non-finite covariance eigenvalue");
        if (e < -1e-8 * max_eig)
            throw degenerate_covariance_error("cma-es: covariance has a negative eigenvalue");
        if (e < floor)
            e = floor; // tiny numerical dips are floored quietly
    }
}

} // namespace

void jacobi_eigen(const std::vector<double>& matrix, int dim, std::vector<double>& eigenvalues,
                  std::vector<double>& basis) {
    std::vector<double> a = matrix;
    basis.assign(dim * dim, 0.0);
    for (int i = 0; i < dim; ++i)
        basis[i * dim + i] = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < dim; ++p)
            for (int q = p + 1; q < dim; ++q)
                off += a[p * dim + q] * a[p * dim + q];
        if (off < 1e-28)
            break;
        for (int p = 0; p < dim; ++p) {
            for (int q = p + 1; q < dim; ++q) {
                const double apq = a[p * dim + q];
                if (std::abs(apq) < 1e-300)
                    continue;
                const double app = a[p * dim + p];
                const double aqq = a[q * dim + q];
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = t * c;
                for (int k = 0; k < dim; ++k) {
                    const double akp = a[k * dim + p];
                    const double akq = a[k * dim + q];
                    a[k * dim + p] = c * akp - sn * akq;
                    a[k * dim + q] = sn * akp + c * akq;
                }
                for (int k = 0; k < dim; ++k) {
                    const double apk = a[p * dim + k];
                    const double aqk = a[q * dim + k];
                    a[p * dim + k] = c * apk - sn * aqk;
                    a[q * dim + k] = sn * apk + c * aqk;
                }
                for (int k = 0; k < dim; ++k) {
                    const double bkp = basis[k * dim + p];
                    const double bkq = basis[k * dim + q];
                    basis[k * dim + p] = c * bkp - sn * bkq;
                    basis[k * dim + q] = sn * bkp + c * bkq;
                }
            }
        }
    }
    eigenvalues.assign(dim, 0.0);
    for (int i = 0; i < dim; ++i)
        eigenvalues[i] = a[i * dim + i];
}

CmaState cma_init(int dim, int pop_size, int num_elites, double sigma0, double cov_lr_scale) {
    if (dim < 1)
        throw std::invalid_argument("cma_init: dim must be >= 1");
    if (pop_size < 2)
        throw std::invalid_argument("cma_init: pop_size must be >= 2");
    if (num_elites <= 0)
        num_elites = pop_size / 2;
    if (num_elites > pop_size)
        throw std::invalid_argument("cma_init: num_elites must be <= pop_size");
    if (num_elites < 1)
        num_elites = 1;
    if (!(sigma0 > 0.0))
        throw std::invalid_argument("cma_init: sigma0 must be positive");

    CmaState s;
    s.dim = dim;
    s.pop_size = pop_size;
    s.num_elites = num_elites;
    s.sigma = sigma0;
    s.cov_lr_scale = cov_lr_scale;
    s.mean.assign(dim, 0.0);
    s.cov.assign(dim * dim, 0.0);
    for (int i = 0; i < dim; ++i)
        s.cov[i * dim + i] = 1.0;
    s.path_sigma.assign(dim, 0.0);
    s.path_cov.assign(dim, 0.0);

    // Log-decreasing recombination weights, canonical constants.
    s.weights.resize(num_elites);
    double wsum = 0.0;
    for (int i = 0; i < num_elites; ++i) {
        s.weights[i] = std::log(num_elites + 0.5) - std::log(i + 1.0);
        wsum += s.weights[i];
    }
    double w2 = 0.0;
    for (double& w : s.weights) {
        w /= wsum;
        w2 += w * w;
    }
    s.mu_eff = 1.0 / w2;

    const double d = dim;
    s.c_sigma = (s.mu_eff + 2.0) / (d + s.mu_eff + 5.0);
    s.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((s.mu_eff - 1.0) / (d + 1.0)) - 1.0) + s.c_sigma;
    s.c_cov_path = (4.0 + s.mu_eff / d) / (d + 4.0 + 2.0 * s.mu_eff / d);
    s.c_rank1 = cov_lr_scale * 2.0 / ((d + 1.3) * (d + 1.3) + s.mu_eff);
    s.c_rankmu = std::min(1.0 - s.c_rank1,
                          cov_lr_scale * 2.0 * (s.mu_eff - 2.0 + 1.0 / s.mu_eff) /
                              ((d + 2.0) * (d + 2.0) + s.mu_eff));
    if (s.c_rankmu < 0.0)
        s.c_rankmu = 0.0;
    s.chi_n = std::sqrt(d) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d));
    return s;
}

std::vector<std::vector<double>> cma_ask(const CmaState& state, Rng& rng) {
    std::vector<double> eig, basis;
    decompose(state, eig, basis);
    std::vector<double> sq(eig.size());
    for (size_t i = 0; i < eig.size(); ++i)
        sq[i] = std::sqrt(eig[i]);

    const int d = state.dim;
    std::vector<std::vector<double>> out(state.pop_size);
    std::vector<double> n(d);
    for (int k = 0; k < state.pop_size; ++k) {
        for (int i = 0; i < d; ++i)
            n[i] = rng.next_gaussian() * sq[i];
        auto& x = out[k];
        x.assign(d, 0.0);
        for (int i = 0; i < d; ++i) {
            double acc = 0.0;
            for (int j = 0; j < d; ++j)
                acc += basis[i * d + j] * n[j];
            x[i] = state.mean[i] + state.sigma * acc;
        }
    }
    return out;
}

CmaState cma_tell(const CmaState& state, const std::vector<std::vector<double>>& candidates,
                  const std::vector<double>& fitnesses, bool maximize) {
    if (static_cast<int>(candidates.size()) != state.pop_size ||
        fitnesses.size() != candidates.size())
        throw std::invalid_argument("cma_tell: need pop_size candidates and fitnesses");
    for (double f : fitnesses)
        if (!std::isfinite(f))
            throw std::invalid_argument("cma_tell: non-finite fitness");
    for (const auto& c : candidates)
        if (static_cast<int>(c.size()) != state.dim)
            throw std::invalid_argument("cma_tell: candidate dimension mismatch");

    const int d = state.dim;
    const int mu = state.num_elites;

    // Rank candidates; stable on ties so equal fitnesses keep sample order.
    std::vector<int> order(state.pop_size);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return maximize ? fitnesses[a] > fitnesses[b] : fitnesses[a] < fitnesses[b];
    });

    CmaState next = state;
    next.generation = state.generation + 1;

    // y_i = (x_i - m) / sigma for the mu best; y_w = weighted recombination.
    std::vector<std::vector<double>> y(mu, std::vector<double>(d));
    std::vector<double> y_w(d, 0.0);
    for (int r = 0; r < mu; ++r) {
        const auto& x = candidates[order[r]];
        for (int i = 0; i < d; ++i) {
            y[r][i] = (x[i] - state.mean[i]) / state.sigma;
            y_w[i] += state.weights[r] * y[r][i];
        }
    }
    for (int i = 0; i < d; ++i)
        next.mean[i] = state.mean[i] + state.sigma * y_w[i];

    // Step-size path needs C^{-1/2} y_w.
    std::vector<double> eig, basis;
    decompose(state, eig, basis);
    std::vector<double> tmp(d, 0.0), cinv_yw(d, 0.0);
    for (int j = 0; j < d; ++j) {
        double acc = 0.0;
        for (int i = 0; i < d; ++i)
            acc += basis[i * d + j] * y_w[i]; // B^T y_w
        tmp[j] = acc / std::sqrt(eig[j]);
    }
    for (int i = 0; i < d; ++i) {
        double acc = 0.0;
        for (int j = 0; j < d; ++j)
            acc += basis[i * d + j] * tmp[j]; // B D^{-1} B^T y_w
        cinv_yw[i] = acc;
    }

    const double cs = state.c_sigma;
    double ps_norm2 = 0.0;
    for (int i = 0; i < d; ++i) {
        next.path_sigma[i] = (1.0 - cs) * state.path_sigma[i] +
                             std::sqrt(cs * (2.0 - cs) * state.mu_eff) * cinv_yw[i];
        ps_norm2 += next.path_sigma[i] * next.path_sigma[i];
    }
    const double ps_norm = std::sqrt(ps_norm2);
    const double expected = state.chi_n;
    const double decay = 1.0 - std::pow(1.0 - cs, 2.0 * (state.generation + 1));
    const bool h_sigma =
        ps_norm / std::sqrt(decay) < (1.4 + 2.0 / (d + 1.0)) * expected;

    const double cc = state.c_cov_path;
    for (int i = 0; i < d; ++i)
        next.path_cov[i] = (1.0 - cc) * state.path_cov[i] +
                           (h_sigma ? std::sqrt(cc * (2.0 - cc) * state.mu_eff) * y_w[i] : 0.0);

    // Covariance: decay + rank-1 + rank-mu (+ small correction when h_sigma
    // stalls the path).
    const double c1 = state.c_rank1;
    const double cmu = state.c_rankmu;
    const double delta_h = h_sigma ? 0.0 : cc * (2.0 - cc);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            double v = (1.0 - c1 - cmu) * state.cov[i * d + j];
            v += c1 * (next.path_cov[i] * next.path_cov[j] + delta_h * state.cov[i * d + j]);
            double rmu = 0.0;
            for (int r = 0; r < mu; ++r)
                rmu += state.weights[r] * y[r][i] * y[r][j];
            v += cmu * rmu;
            next.cov[i * d + j] = v;
        }
    }
    symmetrize(next.cov, d);

    next.sigma = state.sigma * std::exp((cs / state.d_sigma) * (ps_norm / expected - 1.0));
    next.sigma = std::clamp(next.sigma, kSigmaMin, kSigmaMax);
    return next;
}

CmaState cma_repair(const CmaState& state) {
    CmaState s = state;
    symmetrize(s.cov, s.dim);
    std::vector<double> eig, basis;
    jacobi_eigen(s.cov, s.dim, eig, basis);
    double max_eig = 0.0;
    for (double e : eig)
        if (std::isfinite(e) && e > max_eig)
            max_eig = e;
    if (max_eig <= 0.0)
        max_eig = 1.0;
    const double floor = std::max(kEigenFloorRatio * max_eig, 1e-300);
    for (double& e : eig)
        if (!std::isfinite(e) || e < floor)
            e = floor;
    // Reassemble B diag(eig) B^T.
    const int d = s.dim;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double acc = 0.0;
            for (int k = 0; k < d; ++k)
                acc += basis[i * d + k] * eig[k] * basis[j * d + k];
            s.cov[i * d + j] = acc;
        }
    symmetrize(s.cov, d);
    if (!std::isfinite(s.sigma))
        s.sigma = 1.0;
    s.sigma = std::clamp(s.sigma, kSigmaMin, kSigmaMax);
    return s;
}

} // namespace inferum
