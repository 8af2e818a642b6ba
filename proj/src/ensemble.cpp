#include "ethlab/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <mutex>
#include <thread>

#include "ethlab/linalg.hpp"

namespace ethlab {

const char* dist_name(Dist d) { return d == Dist::ComplexGaussian ? "complex-gaussian" : "uniform-phase"; }

Dist parse_dist(const std::string& s) {
    if (s == "complex-gaussian") return Dist::ComplexGaussian;
    if (s == "uniform-phase") return Dist::UniformPhase;
    throw Error(ErrorCode::ConfigError, "dist: unknown distribution '" + s + "'");
}

Mat sample_iid(const SampleConfig& cfg) {
    if (cfg.n < 2) throw Error(ErrorCode::InvalidArgument, "sample dimension must be at least 2");
    std::mt19937_64 gen(cfg.seed);
    const int n = cfg.n;
    const double scale = 1.0 / std::sqrt(double(n));
    Mat x(n, n);
    if (cfg.dist == Dist::ComplexGaussian) {
        std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double re = nd(gen);
                const double im = nd(gen);
                x(i, j) = cd(re, im) * scale;
            }
    } else {
        std::uniform_real_distribution<double> ud(0.0, 2.0 * std::numbers::pi);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) x(i, j) = std::polar(scale, ud(gen));
    }
    return x;
}

Mat hermitise(const Mat& x, const Mat& lambda) {
    const int n = int(x.rows());
    Mat h = Mat::Zero(2 * n, 2 * n);
    h.topRightCorner(n, n) = x + lambda;
    h.bottomLeftCorner(n, n) = (x + lambda).adjoint();
    return h;
}

namespace {

// Phase making the largest-modulus entry of u real positive.
cd phase_fix(const Eigen::Ref<const Vec>& u) {
    Eigen::Index k = 0;
    u.cwiseAbs().maxCoeff(&k);
    const double a = std::abs(u(k));
    return a > 0 ? std::conj(u(k)) / a : cd(1.0);
}

double sorted_min_gap(const RVec& v) {
    double g = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k + 1 < v.size(); ++k) g = std::min(g, v(k + 1) - v(k));
    return g;
}

HermSpectrum from_positive(const RVec& sig, const Mat& U, const Mat& V) {
    const int n = int(sig.size());
    HermSpectrum s;
    s.lambdas.resize(2 * n);
    s.W.resize(2 * n, 2 * n);
    const double r = 1.0 / std::sqrt(2.0);
    for (int i = 1; i <= n; ++i) {
        const int cp = HermSpectrum::column(i, n), cm = HermSpectrum::column(-i, n);
        s.lambdas(cp) = sig(i - 1);
        s.lambdas(cm) = -sig(i - 1);
        s.W.col(cp).head(n) = r * U.col(i - 1);
        s.W.col(cp).tail(n) = r * V.col(i - 1);
        s.W.col(cm).head(n) = r * U.col(i - 1);
        s.W.col(cm).tail(n) = -r * V.col(i - 1);
    }
    s.min_gap = sorted_min_gap(s.lambdas);
    s.degenerate = s.min_gap < kDegenerateGap;
    return s;
}

}  // namespace

HermSpectrum spectral(const Mat& h) {
    const int n = int(h.rows() / 2);
    HermEig e = herm_eig(h);
    RVec sig(n);
    Mat U(n, n), V(n, n);
    const double r2 = std::sqrt(2.0);
    for (int i = 0; i < n; ++i) {
        const Vec w = e.vectors.col(n + i);
        const cd ph = phase_fix(w.head(n));
        sig(i) = e.values(n + i);
        U.col(i) = r2 * ph * w.head(n);
        V.col(i) = r2 * ph * w.tail(n);
    }
    return from_positive(sig, U, V);
}

Vec SpectralSample::w(int i) const {
    const int k = std::abs(i) - 1;
    Vec out(2 * n());
    const double r = 1.0 / std::sqrt(2.0);
    out.head(n()) = r * U.col(k);
    out.tail(n()) = (i > 0 ? r : -r) * V.col(k);
    return out;
}

HermSpectrum SpectralSample::hermitian() const { return from_positive(sigma, U, V); }

Mat SpectralSample::H() const { return hermitise(Y, Mat::Zero(n(), n())); }

SpectralSample make_sample(const Mat& x, const Deformation& def) {
    SpectralSample s;
    s.X = x;
    s.Y = x + def.entries();
    const int n = int(x.rows());
    SvdResult f = svd(s.Y);
    s.sigma.resize(n);
    s.U.resize(n, n);
    s.V.resize(n, n);
    for (int i = 0; i < n; ++i) {
        const int src = n - 1 - i;
        const cd ph = phase_fix(f.u.col(src));
        s.sigma(i) = f.s(src);
        s.U.col(i) = ph * f.u.col(src);
        s.V.col(i) = ph * f.v.col(src);
    }
    double g = 2.0 * s.sigma(0);
    for (int i = 0; i + 1 < n; ++i) g = std::min(g, s.sigma(i + 1) - s.sigma(i));
    s.min_gap = g;
    s.degenerate = g < kDegenerateGap;
    return s;
}

SpectralSample draw_sample(const SampleConfig& cfg, const Deformation& def) {
    if (cfg.n != def.dim()) throw Error(ErrorCode::InvalidArgument, "sample and deformation dimensions differ");
    return make_sample(sample_iid(cfg), def);
}

Mat resolvent(const HermSpectrum& s, cd w) {
    if (w.imag() == 0.0) throw Error(ErrorCode::InvalidArgument, "resolvent needs Im w != 0");
    Vec d(s.lambdas.size());
    for (Eigen::Index k = 0; k < d.size(); ++k) d(k) = 1.0 / (s.lambdas(k) - w);
    return s.W * d.asDiagonal() * s.W.adjoint();
}

Mat resolvent(const Mat& h, cd w) { return resolvent(spectral(h), w); }

LeftRight left_right(const Mat& y) {
    const int n = int(y.rows());
    GenEig e = gen_eig(y);
    LeftRight lr;
    lr.mus = e.values;
    lr.R = e.right;
    for (int i = 0; i < n; ++i) lr.R.col(i).normalize();
    const Mat rinv = lr.R.partialPivLu().inverse();
    lr.L = rinv.transpose();
    lr.biorthogonality = (lr.L.transpose() * lr.R - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
    const Mat rr = lr.R.adjoint() * lr.R;
    const Mat ll = lr.L.adjoint() * lr.L;
    lr.O = rr.cwiseProduct(ll).transpose();
    double g = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) g = std::min(g, std::abs(lr.mus(i) - lr.mus(j)));
    lr.min_gap = g;
    lr.degenerate = g < kDegenerateGap;
    return lr;
}

double condition_number(const LeftRight& lr, int i) { return std::sqrt(lr.O(i, i).real()); }

double condition_number_fd(const Mat& y, const LeftRight& lr, int i, double t) {
    const Vec l = lr.L.col(i), r = lr.R.col(i);
    const Mat e = l.conjugate() * r.adjoint() / (l.norm() * r.norm());
    GenEig p = gen_eig(y + t * e);
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < p.values.size(); ++k) best = std::min(best, std::abs(p.values(k) - lr.mus(i)));
    return best / t;
}

namespace {

// Greedy nearest-neighbour assignment; returns the new values in the order of
// prev and the largest displacement.
Vec match(const Vec& prev, const Vec& next, double& cost) {
    const int n = int(prev.size());
    std::vector<std::tuple<double, int, int>> pairs;
    pairs.reserve(std::size_t(n) * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) pairs.emplace_back(std::abs(prev(a) - next(b)), a, b);
    std::sort(pairs.begin(), pairs.end());
    std::vector<char> used_a(n, 0), used_b(n, 0);
    Vec out(n);
    cost = 0.0;
    int left = n;
    for (const auto& [d, a, b] : pairs) {
        if (used_a[a] || used_b[b]) continue;
        used_a[a] = used_b[b] = 1;
        out(a) = next(b);
        cost = std::max(cost, d);
        if (--left == 0) break;
    }
    return out;
}

}  // namespace

OuTrajectory ou_flow(const Mat& x0, const Mat& lambda, double dt, double t_end, std::uint64_t seed) {
    if (!(dt > 0 && dt <= 1e-2)) throw Error(ErrorCode::InvalidArgument, "ou_flow needs 0 < dt <= 1e-2");
    if (!(t_end >= 0 && t_end <= 1)) throw Error(ErrorCode::InvalidArgument, "ou_flow needs 0 <= T <= 1");
    const int n = int(x0.rows());
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5 * dt / n));
    OuTrajectory tr;
    Mat x = x0;
    tr.times.push_back(0.0);
    tr.mus.push_back(gen_eig(x + lambda).values);
    const int steps = int(std::llround(t_end / dt));
    const double limit = 10.0 * std::sqrt(dt);
    for (int s = 1; s <= steps; ++s) {
        Mat db(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double re = nd(gen);
                const double im = nd(gen);
                db(i, j) = cd(re, im);
            }
        x += -0.5 * dt * x + db;
        double cost = 0.0;
        Vec next = match(tr.mus.back(), gen_eig(x + lambda).values, cost);
        tr.max_step_cost = std::max(tr.max_step_cost, cost);
        if (cost > limit)
            throw Error(ErrorCode::TrackingLoss, "step " + std::to_string(s) + " matching cost " + std::to_string(cost));
        tr.times.push_back(s * dt);
        tr.mus.push_back(std::move(next));
    }
    return tr;
}

void dump_sample(const std::string& path, const Mat& x, const SampleConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
    out.precision(17);
    out << "# N=" << cfg.n << " dist=" << dist_name(cfg.dist) << " seed=" << cfg.seed << "\n";
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j) out << x(i, j).real() << " " << x(i, j).imag() << "\n";
}

Mat load_sample(const std::string& path, SampleConfig* cfg) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path);
    std::string header;
    std::getline(in, header);
    SampleConfig c;
    std::string dist;
    {
        std::istringstream hs(header);
        std::string tok;
        while (hs >> tok) {
            if (tok.rfind("N=", 0) == 0) c.n = std::stoi(tok.substr(2));
            else if (tok.rfind("dist=", 0) == 0) dist = tok.substr(5);
            else if (tok.rfind("seed=", 0) == 0) c.seed = std::stoull(tok.substr(5));
        }
    }
    if (c.n < 1) throw Error(ErrorCode::InvalidArgument, "sample dump header lacks N");
    c.dist = parse_dist(dist);
    Mat x(c.n, c.n);
    for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j) {
            double re, im;
            if (!(in >> re >> im)) throw Error(ErrorCode::InvalidArgument, "truncated sample dump");
            x(i, j) = cd(re, im);
        }
    if (cfg) *cfg = c;
    return x;
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) {
    // splitmix64 finaliser over a combination of both inputs
    std::uint64_t z = master ^ (trial + 0x9e3779b97f4a7c15ULL + (master << 6) + (master >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int t = 0; t < count; ++t) fn(t);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int t = next++; t < count; t = next++) {
                try {
                    fn(t);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace ethlab
