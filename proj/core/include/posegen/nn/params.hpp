#pragma once

#include <deque>
#include <string>

#include "posegen/nn/tape.hpp"
#include "posegen/rng.hpp"

namespace posegen::nn {

struct Param {
    std::string name;
    Mat value;
    Mat grad;
};

/// Named trainable matrices with stable addresses and a fixed registration
/// order (which fixes the optimizer's update order and therefore the exact
/// arithmetic of a training run).
class ParamStore {
public:
    Param& add(const std::string& name, long rows, long cols);
    Param& add_zeros(const std::string& name, long rows, long cols);
    Param& add_gaussian(const std::string& name, long rows, long cols, CounterRng& rng,
                        double std);
    /// Xavier/Glorot uniform in +-sqrt(6/(fan_in+fan_out)).
    Param& add_xavier(const std::string& name, long rows, long cols, CounterRng& rng);

    Param* find(const std::string& name);
    const Param* find(const std::string& name) const;
    Param& at(const std::string& name);

    void zero_grads();
    /// Overwrites every value with N(0, std) draws; used by tests that need a
    /// fully randomized model regardless of the production init.
    void randomize_all(CounterRng& rng, double std);

    bool all_finite() const;

    size_t count() const { return params_.size(); }
    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

private:
    std::deque<Param> params_;
};

/// Adam with bias correction; one state pair per parameter, updated in
/// registration order.
class AdamOptimizer {
public:
    struct Config {
        double lr = 1e-3;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double eps = 1e-8;
    };

    explicit AdamOptimizer(ParamStore& store, Config cfg = {});

    void step();
    long step_count() const { return t_; }

    // Checkpoint access: first/second moments in registration order.
    std::deque<Mat>& moments_m() { return m_; }
    std::deque<Mat>& moments_v() { return v_; }
    const std::deque<Mat>& moments_m() const { return m_; }
    const std::deque<Mat>& moments_v() const { return v_; }
    void set_step_count(long t) { t_ = t; }
    Config& config() { return cfg_; }
    const Config& config() const { return cfg_; }

private:
    ParamStore& store_;
    Config cfg_;
    std::deque<Mat> m_;
    std::deque<Mat> v_;
    long t_ = 0;
};

} // namespace posegen::nn
