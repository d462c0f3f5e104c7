#include "posegen/metrics.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "posegen/errors.hpp"
#include "posegen/rng.hpp"

namespace posegen::metrics {

FeatureSet extract_features(const vae::SequenceVae& v,
                            const std::vector<MatD>& normalized_seqs) {
    if (normalized_seqs.empty()) throw ValidationError("extract_features: empty input");
    return v.encode_features(normalized_seqs);
}

namespace {

MatD population_covariance(const FeatureSet& x, Eigen::RowVectorXd& mean) {
    mean = x.colwise().mean();
    MatD centered = x;
    centered.rowwise() -= mean;
    return (centered.transpose() * centered) / static_cast<double>(x.rows());
}

} // namespace

double fid(const FeatureSet& real, const FeatureSet& gen) {
    if (real.rows() < 2 || gen.rows() < 2)
        throw ValidationError("fid: both sets need at least 2 rows");
    if (real.cols() != gen.cols())
        throw ValidationError("fid: feature dims differ (" + std::to_string(real.cols()) +
                              " vs " + std::to_string(gen.cols()) + ")");
    Eigen::RowVectorXd mu_r, mu_g;
    const MatD cov_r = population_covariance(real, mu_r);
    const MatD cov_g = population_covariance(gen, mu_g);

    const MatD prod = cov_r * cov_g;
    const MatD sym = 0.5 * (prod + prod.transpose());
    Eigen::SelfAdjointEigenSolver<MatD> es(sym);
    if (es.info() != Eigen::Success) throw ComputeError("fid: eigendecomposition failed");
    double trace_sqrt = 0;
    for (long i = 0; i < es.eigenvalues().size(); ++i)
        trace_sqrt += std::sqrt(std::max(es.eigenvalues()[i], 0.0));

    const double value = (mu_r - mu_g).squaredNorm() + cov_r.trace() + cov_g.trace() -
                         2.0 * trace_sqrt;
    if (!std::isfinite(value)) throw ComputeError("fid: non-finite result");
    return value;
}

double diversity(const FeatureSet& feats, int pairs, std::uint64_t seed, DiversityMode mode) {
    const long n = feats.rows();
    if (n < 2) throw ValidationError("diversity: need at least 2 rows");
    if (mode == DiversityMode::variance) {
        Eigen::RowVectorXd mean;
        return population_covariance(feats, mean).trace();
    }
    if (pairs < 1) throw ValidationError("diversity: pairs must be >= 1");
    CounterRng rng = CounterRng::derive(seed, "diversity");
    double acc = 0;
    for (int s = 0; s < pairs; ++s) {
        const long i = rng.uniform_int(0, n - 1);
        long j = rng.uniform_int(0, n - 2);
        if (j >= i) ++j;
        acc += (feats.row(i) - feats.row(j)).norm();
    }
    return acc / pairs;
}

double diversity_exhaustive(const FeatureSet& feats) {
    const long n = feats.rows();
    if (n < 2) throw ValidationError("diversity: need at least 2 rows");
    double acc = 0;
    long count = 0;
    for (long i = 0; i < n; ++i)
        for (long j = i + 1; j < n; ++j) {
            acc += (feats.row(i) - feats.row(j)).norm();
            ++count;
        }
    return acc / static_cast<double>(count);
}

PcaCurves pca_curve(const std::vector<PoseSequence>& seqs) {
    if (seqs.empty()) throw ValidationError("pca_curve: need at least one sequence");
    const int d = seqs.front().dim();
    long total = 0;
    for (const auto& s : seqs) {
        if (s.dim() != d) throw ValidationError("pca_curve: mixed dims");
        total += s.length();
    }
    MatD pooled(total, d);
    long at = 0;
    for (const auto& s : seqs) {
        pooled.middleRows(at, s.length()) = s.values.cast<double>();
        at += s.length();
    }
    const Eigen::RowVectorXd mean = pooled.colwise().mean();
    MatD centered = pooled;
    centered.rowwise() -= mean;

    PcaCurves out;
    if (centered.cwiseAbs().maxCoeff() < 1e-12) {
        out.degenerate = true;
        out.component = VecD::Zero(d);
        for (const auto& s : seqs) out.curves.push_back(VecD::Zero(s.length()));
        return out;
    }
    const MatD cov = (centered.transpose() * centered) / static_cast<double>(total);
    Eigen::SelfAdjointEigenSolver<MatD> es(cov);
    if (es.info() != Eigen::Success) throw ComputeError("pca_curve: eigendecomposition failed");
    VecD v = es.eigenvectors().col(d - 1); // eigenvalues ascending
    int max_idx = 0;
    for (int i = 1; i < d; ++i)
        if (std::abs(v[i]) > std::abs(v[max_idx])) max_idx = i;
    if (v[max_idx] < 0) v = -v;
    out.component = v;
    for (const auto& s : seqs) {
        MatD c = s.values.cast<double>();
        c.rowwise() -= mean;
        out.curves.push_back(c * v);
    }
    return out;
}

double band_amplitude(const VecD& series, int fps, double f_lo, double f_hi) {
    const long t = series.size();
    if (t < 2) throw ValidationError("band_amplitude: series too short");
    if (fps <= 0) throw ValidationError("band_amplitude: fps must be positive");
    VecD x = series.array() - series.mean();
    double power = 0;
    const double two_pi = 6.283185307179586477;
    for (long k = 1; k <= t / 2; ++k) {
        const double freq = static_cast<double>(k) * fps / t;
        if (freq < f_lo || freq > f_hi) continue;
        double re = 0, im = 0;
        for (long i = 0; i < t; ++i) {
            const double ang = two_pi * k * i / t;
            re += x[i] * std::cos(ang);
            im -= x[i] * std::sin(ang);
        }
        const double weight = (t % 2 == 0 && k == t / 2) ? 1.0 : 2.0;
        power += weight * (re * re + im * im) / static_cast<double>(t * t);
    }
    return std::sqrt(2.0 * power);
}

MotionClass classify_motion(const PoseSequence& seq, const MotionProbeConfig& probe) {
    if (seq.dim() < 2) throw ValidationError("classify_motion: need pitch and yaw dims");
    const double f_lo = probe.frequency * (1.0 - probe.band);
    const double f_hi = probe.frequency * (1.0 + probe.band);
    const VecD pitch = seq.values.col(0).cast<double>();
    const VecD yaw = seq.values.col(1).cast<double>();
    const double a_pitch = band_amplitude(pitch, seq.fps, f_lo, f_hi);
    const double a_yaw = band_amplitude(yaw, seq.fps, f_lo, f_hi);
    if (std::max(a_pitch, a_yaw) < probe.still_threshold) return MotionClass::still;
    return a_pitch >= a_yaw ? MotionClass::nod : MotionClass::shake;
}

namespace {

VecD resample_linear(const VecD& x, long k) {
    const long t = x.size();
    VecD out(k);
    if (t == 1) {
        out.setConstant(x[0]);
        return out;
    }
    for (long j = 0; j < k; ++j) {
        const double pos = k == 1 ? 0.5 * (t - 1)
                                  : static_cast<double>(j) * (t - 1) / (k - 1);
        const long lo = static_cast<long>(std::floor(pos));
        const long hi = std::min(lo + 1, t - 1);
        const double f = pos - lo;
        out[j] = (1.0 - f) * x[lo] + f * x[hi];
    }
    return out;
}

double pearson(const VecD& a, const VecD& b, bool& degenerate) {
    const double ma = a.mean(), mb = b.mean();
    const VecD ca = a.array() - ma;
    const VecD cb = b.array() - mb;
    const double va = ca.squaredNorm(), vb = cb.squaredNorm();
    if (va < 1e-12 || vb < 1e-12) {
        degenerate = true;
        return 0.0;
    }
    degenerate = false;
    return ca.dot(cb) / std::sqrt(va * vb);
}

} // namespace

EnvelopeCorrelation amplitude_envelope_correlation(const PoseSequence& seq, const VecD& energy,
                                                   const MotionProbeConfig& probe) {
    if (seq.dim() < 2) throw ValidationError("envelope correlation: need pitch and yaw dims");
    if (energy.size() < 1) throw ValidationError("envelope correlation: empty energy series");
    const long t = seq.length();
    const double f_lo = probe.frequency * (1.0 - probe.band);
    const double f_hi = probe.frequency * (1.0 + probe.band);
    const VecD pitch = seq.values.col(0).cast<double>();
    const VecD yaw = seq.values.col(1).cast<double>();
    const VecD& axis =
        band_amplitude(pitch, seq.fps, f_lo, f_hi) >= band_amplitude(yaw, seq.fps, f_lo, f_hi)
            ? pitch
            : yaw;

    long window = std::lround(seq.fps / probe.frequency); // one carrier period
    window = std::max<long>(2, std::min<long>(window, t));
    VecD centered = axis.array() - axis.mean();
    VecD rms(t);
    for (long i = 0; i < t; ++i) {
        const long lo = std::max<long>(0, i - window / 2);
        const long hi = std::min<long>(t - 1, i + window / 2);
        double acc = 0;
        for (long j = lo; j <= hi; ++j) acc += centered[j] * centered[j];
        rms[i] = std::sqrt(acc / static_cast<double>(hi - lo + 1));
    }
    const VecD env = resample_linear(energy, t);
    EnvelopeCorrelation out;
    out.r = pearson(rms, env, out.degenerate);
    if (out.degenerate) out.r = 0.0;
    return out;
}

} // namespace posegen::metrics
