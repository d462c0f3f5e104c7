#include "posegen/nn/params.hpp"

#include <cmath>

#include "posegen/errors.hpp"

namespace posegen::nn {

Param& ParamStore::add(const std::string& name, long rows, long cols) {
    if (find(name)) throw ValidationError("duplicate parameter name: " + name);
    params_.push_back(Param{name, Mat::Zero(rows, cols), Mat::Zero(rows, cols)});
    return params_.back();
}

Param& ParamStore::add_zeros(const std::string& name, long rows, long cols) {
    return add(name, rows, cols);
}

Param& ParamStore::add_gaussian(const std::string& name, long rows, long cols,
                                CounterRng& rng, double std) {
    Param& p = add(name, rows, cols);
    for (long i = 0; i < p.value.size(); ++i) p.value.data()[i] = std * rng.gaussian();
    return p;
}

Param& ParamStore::add_xavier(const std::string& name, long rows, long cols,
                              CounterRng& rng) {
    Param& p = add(name, rows, cols);
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (long i = 0; i < p.value.size(); ++i)
        p.value.data()[i] = rng.uniform(-bound, bound);
    return p;
}

Param* ParamStore::find(const std::string& name) {
    for (auto& p : params_)
        if (p.name == name) return &p;
    return nullptr;
}

const Param* ParamStore::find(const std::string& name) const {
    for (const auto& p : params_)
        if (p.name == name) return &p;
    return nullptr;
}

Param& ParamStore::at(const std::string& name) {
    Param* p = find(name);
    if (!p) throw ValidationError("unknown parameter: " + name);
    return *p;
}

void ParamStore::zero_grads() {
    for (auto& p : params_) p.grad.setZero();
}

void ParamStore::randomize_all(CounterRng& rng, double std) {
    for (auto& p : params_)
        for (long i = 0; i < p.value.size(); ++i) p.value.data()[i] = std * rng.gaussian();
}

bool ParamStore::all_finite() const {
    for (const auto& p : params_)
        if (!p.value.allFinite()) return false;
    return true;
}

AdamOptimizer::AdamOptimizer(ParamStore& store, Config cfg) : store_(store), cfg_(cfg) {
    for (const auto& p : store_) {
        m_.push_back(Mat::Zero(p.value.rows(), p.value.cols()));
        v_.push_back(Mat::Zero(p.value.rows(), p.value.cols()));
    }
}

void AdamOptimizer::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    size_t i = 0;
    for (auto& p : store_) {
        Mat& m = m_[i];
        Mat& v = v_[i];
        m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * p.grad;
        v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * p.grad.cwiseProduct(p.grad);
        const Mat mhat = m / bc1;
        const Mat vhat = v / bc2;
        p.value.array() -= cfg_.lr * mhat.array() / (vhat.array().sqrt() + cfg_.eps);
        ++i;
    }
}

} // namespace posegen::nn
