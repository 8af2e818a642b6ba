#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ethlab/deformation.hpp"

namespace ethlab {

enum class Dist { ComplexGaussian, UniformPhase };
const char* dist_name(Dist d);
Dist parse_dist(const std::string& s);

struct SampleConfig {
    int n = 0;
    Dist dist = Dist::ComplexGaussian;
    std::uint64_t seed = 0;
};

// Entries chi / sqrt(N) with E chi = 0, E|chi|^2 = 1, E chi^2 = 0.
Mat sample_iid(const SampleConfig& cfg);

// [[0, X + L], [(X + L)^*, 0]].
Mat hermitise(const Mat& x, const Mat& lambda);

// Spectrum of a Hermitisation indexed by i = -N..-1, 1..N; column c of W holds
// w_i with c = i + N for i < 0 and c = i + N - 1 for i > 0 (ascending eigenvalues).
struct HermSpectrum {
    RVec lambdas;  // 2N, ascending
    Mat W;
    double min_gap = 0.0;
    bool degenerate = false;

    int n() const { return int(lambdas.size() / 2); }
    static int column(int i, int n) { return i < 0 ? i + n : i + n - 1; }
    double lambda(int i) const { return lambdas(column(i, n())); }
};

inline constexpr double kDegenerateGap = 1e-10;

// Dense Hermitian eigensolve; w_{-i} := E_- w_i and the largest-modulus entry
// of each u_i = sqrt(2) (w_i)_{1..N} is made real positive.
HermSpectrum spectral(const Mat& h);

// Singular triplets of Y = X + L in ascending order with the same phase rule,
// together with the induced Hermitisation spectrum.
struct SpectralSample {
    Mat X;
    Mat Y;       // X + L
    RVec sigma;  // ascending
    Mat U, V;
    double min_gap = 0.0;
    bool degenerate = false;

    int n() const { return int(sigma.size()); }
    double lambda(int i) const { return i > 0 ? sigma(i - 1) : -sigma(-i - 1); }
    Vec w(int i) const;
    HermSpectrum hermitian() const;
    Mat H() const;
};

SpectralSample make_sample(const Mat& x, const Deformation& def);
SpectralSample draw_sample(const SampleConfig& cfg, const Deformation& def);

Mat resolvent(const HermSpectrum& s, cd w);
Mat resolvent(const Mat& h, cd w);

// Bi-orthonormal eigen-data of a non-Hermitian matrix.
struct LeftRight {
    Vec mus;
    Mat R;  // columns r_i
    Mat L;  // columns l_j with l_j^t r_i = delta_ij
    Mat O;  // O_ij = <r_j, r_i><l_j, l_i>
    double min_gap = 0.0;
    bool degenerate = false;
    double biorthogonality = 0.0;  // max |l_j^t r_i - delta_ij|
};
LeftRight left_right(const Mat& y);

double condition_number(const LeftRight& lr, int i);
// |mu_i(Y + tE) - mu_i(Y)| / t for the worst unit-norm rank-one E.
double condition_number_fd(const Mat& y, const LeftRight& lr, int i, double t = 1e-6);

struct OuTrajectory {
    std::vector<double> times;
    std::vector<Vec> mus;  // tracked eigenvalues at each time
    double max_step_cost = 0.0;
};
// Euler-Maruyama for dX = dB / sqrt(N) - X dt / 2, eigenvalues of X(t) + L
// tracked by greedy nearest-neighbour matching.
OuTrajectory ou_flow(const Mat& x0, const Mat& lambda, double dt, double t_end, std::uint64_t seed);

// Text dump: header line then one "re im" pair per line in row-major order.
void dump_sample(const std::string& path, const Mat& x, const SampleConfig& cfg);
Mat load_sample(const std::string& path, SampleConfig* cfg = nullptr);

// Per-trial stream seed derived from the master seed.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial);

// Runs fn(trial) for trial in [0, count) on a pool of workers.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

}  // namespace ethlab
