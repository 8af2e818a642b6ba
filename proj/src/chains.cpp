#include "ethlab/chains.hpp"

#include <cmath>

#include "ethlab/linalg.hpp"
#include "ethlab/stability.hpp"

namespace ethlab {

void ChainSpec::validate() const {
    if (ws.empty()) throw Error(ErrorCode::InvalidArgument, "chain needs at least one spectral parameter");
    if (ws.size() > 6) throw Error(ErrorCode::InvalidArgument, "chains longer than 6 are not supported");
    if (Bs.size() + 1 != ws.size())
        throw Error(ErrorCode::InvalidArgument, "chain with " + std::to_string(ws.size()) + " parameters needs " +
                                                    std::to_string(ws.size() - 1) + " matrices");
    if (!regular_flags.empty() && regular_flags.size() != Bs.size())
        throw Error(ErrorCode::InvalidArgument, "regular_flags length mismatch");
    for (cd w : ws)
        if (w.imag() == 0.0) throw Error(ErrorCode::InvalidArgument, "chain spectral parameters must be non-real");
}

ChainEvaluator::ChainEvaluator(const Deformation& def, const ChainSpec& spec, bool memoize)
    : def_(def), spec_(spec), memo_(memoize) {
    spec.validate();
    singles_.reserve(spec.ws.size());
    for (cd w : spec.ws) singles_.push_back(solve_mde(def, w).M);
}

const Mat& ChainEvaluator::single(int i) { return singles_[std::size_t(i)]; }

Mat ChainEvaluator::sub(int l, int r) {
    if (l == r) return singles_[std::size_t(l)];
    if (!memo_) return compute(l, r);
    auto key = std::make_pair(l, r);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    Mat v = compute(l, r);
    cache_.emplace(key, v);
    return v;
}

Mat ChainEvaluator::compute(int l, int r) {
    const Mat& Ml = singles_[std::size_t(l)];
    Mat rhs = Ml * spec_.Bs[std::size_t(l)] * sub(l + 1, r);
    for (int p = l + 1; p <= r - 1; ++p) {
        const Mat left = sub(l, p);
        const Mat right = sub(p, r);
        const cd tp = avg(left), tm = avg_em(left);
        // sum_sigma sigma <M(l..p) E_s> E_s M(p..r)
        rhs += Ml * (tp * right - tm * em_left(right));
    }
    return stability_inverse(rhs, Ml, singles_[std::size_t(r)]);
}

Mat chain_M(const Deformation& def, const ChainSpec& spec, bool memoize) {
    ChainEvaluator ev(def, spec, memoize);
    return ev.sub(0, spec.length() - 1);
}

namespace {

// L * M(ws; Bs) * R with optional outer factors; an empty chain means the
// identity between L and R.
struct ChainExpr {
    std::optional<Mat> left, right;
    std::vector<cd> ws;
    std::vector<Mat> Bs;
};

class VariantBuilder {
public:
    VariantBuilder(const Deformation& def, const ChainSpec& spec) : def_(def), spec_(spec) {
        for (cd w : spec.ws) Ms_.push_back(solve_mde(def, w).M);
        n2_ = int(Ms_[0].rows());
    }

    // 1-based helpers following the lemma's indexing.
    const Mat& M(int i) const { return Ms_[std::size_t(i - 1)]; }
    cd w(int i) const { return spec_.ws[std::size_t(i - 1)]; }
    // B_0 = B_k = E+.
    Mat B(int i) const {
        if (i <= 0 || i >= spec_.length()) return Mat::Identity(n2_, n2_);
        return spec_.Bs[std::size_t(i - 1)];
    }
    Mat E(int sigma) const { return sigma > 0 ? e_plus(n2_ / 2) : e_minus(n2_ / 2); }

    // Plain sub-chain M(w_a, B_a, ..., w_b).
    ChainExpr span(int a, int b) const {
        ChainExpr c;
        for (int i = a; i <= b; ++i) {
            c.ws.push_back(w(i));
            if (i < b) c.Bs.push_back(B(i));
        }
        return c;
    }

    // Joins M(w_a..w_b), a middle matrix, and M(w_c..w_d). Empty ranges turn the
    // middle matrix into an outer factor.
    ChainExpr join(int a, int b, const Mat& mid, int c, int d) const {
        ChainExpr out;
        const bool has_left = a <= b, has_right = c <= d;
        if (has_left) out = span(a, b);
        if (has_left && has_right) {
            out.Bs.push_back(mid);
            ChainExpr rest = span(c, d);
            out.ws.insert(out.ws.end(), rest.ws.begin(), rest.ws.end());
            out.Bs.insert(out.Bs.end(), rest.Bs.begin(), rest.Bs.end());
        } else if (has_right) {
            out = span(c, d);
            out.left = mid;
        } else if (has_left) {
            out.right = mid;
        } else {
            out.left = mid;
        }
        return out;
    }

    Mat eval(const ChainExpr& c) const {
        Mat core;
        if (c.ws.empty()) {
            core = Mat::Identity(n2_, n2_);
        } else {
            ChainSpec s;
            s.ws = c.ws;
            s.Bs = c.Bs;
            core = chain_M(def_, s);
        }
        if (c.left) core = *c.left * core;
        if (c.right) core = core * *c.right;
        return core;
    }

    // <M(w_a..w_b)>-type traces against E_sigma, with optional outer factors.
    cd trace(const ChainExpr& c, int sigma) const {
        const Mat m = eval(c);
        return sigma > 0 ? avg(m) : avg_em(m);
    }

private:
    const Deformation& def_;
    const ChainSpec& spec_;
    std::vector<Mat> Ms_;
    int n2_ = 0;
};

}  // namespace

Mat chain_M_variant(const Deformation& def, const ChainSpec& spec, int j, Expansion which) {
    spec.validate();
    const int k = spec.length();
    if (j < 1 || j > k) throw Error(ErrorCode::InvalidArgument, "pivot j out of range");
    VariantBuilder vb(def, spec);
    const Mat Mj = vb.M(j);
    Mat out = vb.eval(vb.join(1, j - 1, vb.B(j - 1) * Mj * vb.B(j), j + 1, k));
    for (int sigma : {1, -1}) {
        const Mat Es = vb.E(sigma);
        const double s = sigma;
        if (which == Expansion::Right) {
            for (int l = 1; l <= j - 1; ++l) {
                ChainExpr inner = vb.span(l, j - 1);
                inner.right = vb.B(j - 1) * Mj;
                const cd t = vb.trace(inner, sigma);
                // M(w_1..w_l, E_s, w_j, B_j, ..., w_k)
                out += s * t * vb.eval(vb.join(1, l, Es, j, k));
            }
            for (int l = j + 1; l <= k; ++l) {
                const cd t = vb.trace(vb.span(j, l), sigma);
                out += s * t * vb.eval(vb.join(1, j - 1, vb.B(j - 1) * Mj * Es, l, k));
            }
        } else {
            for (int l = 1; l <= j - 1; ++l) {
                const cd t = vb.trace(vb.span(l, j), sigma);
                out += s * t * vb.eval(vb.join(1, l, Es * Mj * vb.B(j), j + 1, k));
            }
            for (int l = j + 1; l <= k; ++l) {
                ChainExpr inner = vb.span(j + 1, l);
                inner.left = Mj * vb.B(j);
                const cd t = vb.trace(inner, sigma);
                out += s * t * vb.eval(vb.join(1, j, Es, l, k));
            }
        }
    }
    return out;
}

ChainBoundsReport chain_bounds_report(const Deformation& def, const std::vector<cd>& ws,
                                      const std::vector<Mat>& as, double delta) {
    const int k = int(as.size());
    if (k < 1 || ws.size() != as.size() + 1)
        throw Error(ErrorCode::InvalidArgument, "bounds report needs k observables and k+1 spectral parameters");
    ChainBoundsReport r;
    r.k = k;
    r.eta = std::numeric_limits<double>::infinity();
    for (cd w : ws) r.eta = std::min(r.eta, std::abs(w.imag()));

    ChainSpec full;
    full.ws = ws;
    for (int i = 0; i < k; ++i) {
        full.Bs.push_back(regularize(def, as[std::size_t(i)], ws[std::size_t(i)], ws[std::size_t(i + 1)], delta).A_reg);
        full.regular_flags.push_back(true);
    }
    r.norm = opnorm(chain_M(def, full));

    ChainSpec tr;
    tr.ws.assign(ws.begin(), ws.begin() + k);
    tr.Bs.assign(full.Bs.begin(), full.Bs.begin() + (k - 1));
    const Mat last = regularize(def, as[std::size_t(k - 1)], ws[std::size_t(k - 1)], ws[0], delta).A_reg;
    r.trace = std::abs(avg_prod(chain_M(def, tr), last));

    const double half = std::floor(k / 2.0);
    r.norm_bound = std::pow(r.eta, -half);
    r.trace_bound = std::max(std::pow(r.eta, -(half - 1.0)), 1.0);
    r.norm_ratio = r.norm / r.norm_bound;
    r.trace_ratio = r.trace / r.trace_bound;
    return r;
}

void to_json(nlohmann::json& j, const ChainBoundsReport& r) {
    j = {{"k", r.k},
         {"eta", r.eta},
         {"norm", r.norm},
         {"trace", r.trace},
         {"norm_bound", r.norm_bound},
         {"trace_bound", r.trace_bound},
         {"norm_ratio", r.norm_ratio},
         {"trace_ratio", r.trace_ratio}};
}

}  // namespace ethlab
