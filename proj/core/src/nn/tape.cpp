#include "posegen/nn/tape.hpp"

#include <cmath>

#include "posegen/errors.hpp"

namespace posegen::nn {

const Mat& Var::val() const { return tape->val(*this); }

Var Tape::push(Mat value, bool needs_grad, std::function<void(Tape&)> back) {
    Node n;
    n.val = std::move(value);
    n.back = std::move(back);
    n.needs_grad = needs_grad;
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Mat value) { return push(std::move(value), false, {}); }

Var Tape::param(const Mat& value, Mat& grad_sink) {
    Mat* sink = &grad_sink;
    Var out = push(value, true, {});
    const int idx = out.idx;
    nodes_[idx].back = [idx, sink](Tape& t) { *sink += t.grad_ref(idx); };
    return out;
}

static void check_same_shape(const Mat& a, const Mat& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ValidationError(std::string(op) + ": shape mismatch " +
                              std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                              " vs " + std::to_string(b.rows()) + "x" +
                              std::to_string(b.cols()));
}

Var Tape::add(Var a, Var b) {
    check_same_shape(a.val(), b.val(), "add");
    Var out = push(a.val() + b.val(), needs(a) || needs(b), {});
    const int oi = out.idx, ai = a.idx, bi = b.idx;
    nodes_[oi].back = [oi, ai, bi](Tape& t) {
        if (t.nodes_[ai].needs_grad) t.grad_ref(ai) += t.grad_ref(oi);
        if (t.nodes_[bi].needs_grad) t.grad_ref(bi) += t.grad_ref(oi);
    };
    return out;
}

Var Tape::sub(Var a, Var b) {
    check_same_shape(a.val(), b.val(), "sub");
    Var out = push(a.val() - b.val(), needs(a) || needs(b), {});
    const int oi = out.idx, ai = a.idx, bi = b.idx;
    nodes_[oi].back = [oi, ai, bi](Tape& t) {
        if (t.nodes_[ai].needs_grad) t.grad_ref(ai) += t.grad_ref(oi);
        if (t.nodes_[bi].needs_grad) t.grad_ref(bi) -= t.grad_ref(oi);
    };
    return out;
}

Var Tape::scale(Var a, double s) {
    Var out = push(a.val() * s, needs(a), {});
    const int oi = out.idx, ai = a.idx;
    nodes_[oi].back = [oi, ai, s](Tape& t) {
        if (t.nodes_[ai].needs_grad) t.grad_ref(ai) += s * t.grad_ref(oi);
    };
    return out;
}

Var Tape::hadamard(Var a, Var b) {
    check_same_shape(a.val(), b.val(), "hadamard");
    Var out = push(a.val().cwiseProduct(b.val()), needs(a) || needs(b), {});
    const int oi = out.idx, ai = a.idx, bi = b.idx;
    nodes_[oi].back = [oi, ai, bi](Tape& t) {
        if (t.nodes_[ai].needs_grad)
            t.grad_ref(ai) += t.grad_ref(oi).cwiseProduct(t.nodes_[bi].val);
        if (t.nodes_[bi].needs_grad)
            t.grad_ref(bi) += t.grad_ref(oi).cwiseProduct(t.nodes_[ai].val);
    };
    return out;
}

Var Tape::matmul(Var a, Var b) {
    if (a.val().cols() != b.val().rows())
        throw ValidationError("matmul: inner dims " + std::to_string(a.val().cols()) + " vs " +
                              std::to_string(b.val().rows()));
    Var out = push(a.val() * b.val(), needs(a) || needs(b), {});
    const int oi = out.idx, ai = a.idx, bi = b.idx;
    nodes_[oi].back = [oi, ai, bi](Tape& t) {
        const Mat& g = t.grad_ref(oi);
        if (t.nodes_[ai].needs_grad) t.grad_ref(ai) += g * t.nodes_[bi].val.transpose();
        if (t.nodes_[bi].needs_grad) t.grad_ref(bi) += t.nodes_[ai].val.transpose() * g;
    };
    return out;
}

Var Tape::transpose(Var a) {
    Var out = push(a.val().transpose(), needs(a), {});
    const int oi = out.idx, ai = a.idx;
    nodes_[oi].back = [oi, ai](Tape& t) {
        if (t.nodes_[ai].needs_grad) t.grad_ref(ai) += t.grad_ref(oi).transpose();
    };
    return out;
}

Var Tape::add_row_broadcast(Var a, Var bias_row) {
    if (bias_row.val().rows() != 1 || bias_row.val().cols() != a.val().cols())
        throw ValidationError("add_row_broadcast: bias must be 1 x cols(a)");
    Mat v = a.val();
    v.rowwise() += bias_row.val().row(0);
    Var out = push(std::move(v), needs(a) || needs(bias_row), {});
    const int oi = out.idx, ai = a.idx, bi = bias_row.idx;
    nodes_[oi].back = [oi, ai, bi](Tape& t) {
        if (t.nodes_[ai].needs_grad) t.grad_ref(ai) += t.grad_ref(oi);
        if (t.nodes_[bi].needs_grad)
            t.grad_ref(bi) += t.grad_ref(oi).colwise().sum();
    };
    return out;
}

Var Tape::slice_rows(Var a, int start, int count) {
    Var out = push(a.val().middleRows(start, count), needs(a), {});
    const int oi = out.idx, ai = a.idx;
    nodes_[oi].back = [oi, ai, start, count](Tape& t) {
        if (t.nodes_[ai].needs_grad)
            t.grad_ref(ai).middleRows(start, count) += t.grad_ref(oi);
    };
    return out;
}

Var Tape::slice_cols(Var a, int start, int count) {
    Var out = push(a.val().middleCols(start, count), needs(a), {});
    const int oi = out.idx, ai = a.idx;
    nodes_[oi].back = [oi, ai, start, count](Tape& t) {
        if (t.nodes_[ai].needs_grad)
            t.grad_ref(ai).middleCols(start, count) += t.grad_ref(oi);
    };
    return out;
}

Var Tape::tile_rows(Var a, int count) {
    const Mat& x = a.val();
    const long r = x.rows();
    Mat v(r * count, x.cols());
    for (int k = 0; k < count; ++k) v.middleRows(k * r, r) = x;
    Var out = push(std::move(v), needs(a), {});
    const int oi = out.idx, ai = a.idx;
    nodes_[oi].back = [oi, ai, r, count](Tape& t) {
        if (!t.nodes_[ai].needs_grad) return;
        for (int k = 0; k < count; ++k)
            t.grad_ref(ai) += t.grad_ref(oi).middleRows(k * r, r);
    };
    return out;
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
    long rows = 0;
    const long cols = parts.front().val().cols();
    bool any = false;
    for (const Var& p : parts) {
        if (p.val().cols() != cols) throw ValidationError("concat_rows: column mismatch");
        rows += p.val().rows();
        any = any || needs(p);
    }
    Mat v(rows, cols);
    long at = 0;
    std::vector<int> idxs;
    std::vector<long> sizes;
    for (const Var& p : parts) {
        v.middleRows(at, p.val().rows()) = p.val();
        at += p.val().rows();
        idxs.push_back(p.idx);
        sizes.push_back(p.val().rows());
    }
    Var out = push(std::move(v), any, {});
    const int oi = out.idx;
    nodes_[oi].back = [oi, idxs, sizes](Tape& t) {
        long at2 = 0;
        for (size_t k = 0; k < idxs.size(); ++k) {
            if (t.nodes_[idxs[k]].needs_grad)
                t.grad_ref(idxs[k]) += t.grad_ref(oi).middleRows(at2, sizes[k]);
            at2 += sizes[k];
        }
    };
    return out;
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
    long cols = 0;
    const long rows = parts.front().val().rows();
    bool any = false;
    for (const Var& p : parts) {
        if (p.val().rows() != rows) throw ValidationError("concat_cols: row mismatch");
        cols += p.val().cols();
        any = any || needs(p);
    }
    Mat v(rows, cols);
    long at = 0;
    std::vector<int> idxs;
    std::vector<long> sizes;
    for (const Var& p : parts) {
        v.middleCols(at, p.val().cols()) = p.val();
        at += p.val().cols();
        idxs.push_back(p.idx);
        sizes.push_back(p.val().cols());
    }
    Var out = push(std::move(v), any, {});
    const int oi = out.idx;
    nodes_[oi].back = [oi, idxs, sizes](Tape& t) {
        long at2 = 0;
        for (size_t k = 0; k < idxs.size(); ++k) {
            if (t.nodes_[idxs[k]].needs_grad)
                t.grad_ref(idxs[k]) += t.grad_ref(oi).middleCols(at2, sizes[k]);
            at2 += sizes[k];
        }
    };
    return out;
}

Var Tape::layer_norm(Var x, Var gain, Var bias, double eps) {
    const Mat& xv = x.val();
    const long r = xv.rows(), c = xv.cols();
    if (gain.val().cols() != c || bias.val().cols() != c)
        throw ValidationError("layer_norm: gain/bias must be 1 x cols(x)");
    Mat xhat(r, c);
    VecD inv_sd(r);
    for (long i = 0; i < r; ++i) {
        const double mu = xv.row(i).mean();
        const double var = (xv.row(i).array() - mu).square().mean();
        const double isd = 1.0 / std::sqrt(var + eps);
        inv_sd[i] = isd;
        xhat.row(i) = (xv.row(i).array() - mu) * isd;
    }
    Mat y = xhat;
    for (long i = 0; i < r; ++i)
        y.row(i) = xhat.row(i).cwiseProduct(gain.val().row(0)) + bias.val().row(0);
    Var out = push(std::move(y), needs(x) || needs(gain) || needs(bias), {});
    const int oi = out.idx, xi = x.idx, gi = gain.idx, bi = bias.idx;
    // keep xhat/inv_sd alive for the backward pass
    auto xhat_p = std::make_shared<Mat>(std::move(xhat));
    auto isd_p = std::make_shared<VecD>(std::move(inv_sd));
    nodes_[oi].back = [oi, xi, gi, bi, xhat_p, isd_p](Tape& t) {
        const Mat& g = t.grad_ref(oi);
        const Mat& xh = *xhat_p;
        const long rr = g.rows(), cc = g.cols();
        if (t.nodes_[gi].needs_grad)
            t.grad_ref(gi) += g.cwiseProduct(xh).colwise().sum();
        if (t.nodes_[bi].needs_grad) t.grad_ref(bi) += g.colwise().sum();
        if (t.nodes_[xi].needs_grad) {
            const Mat& gain_v = t.nodes_[gi].val;
            Mat dx(rr, cc);
            for (long i = 0; i < rr; ++i) {
                // dxhat for this row
                Eigen::RowVectorXd dxh = g.row(i).cwiseProduct(gain_v.row(0));
                const double m1 = dxh.mean();
                const double m2 = dxh.cwiseProduct(xh.row(i)).mean();
                dx.row(i) =
                    ((*isd_p)[i]) * (dxh.array() - m1 - xh.row(i).array() * m2).matrix();
            }
            t.grad_ref(xi) += dx;
        }
    };
    return out;
}

Var Tape::softmax_rows(Var a) {
    const Mat& x = a.val();
    Mat y(x.rows(), x.cols());
    for (long i = 0; i < x.rows(); ++i) {
        const double mx = x.row(i).maxCoeff();
        Eigen::RowVectorXd e = (x.row(i).array() - mx).exp();
        y.row(i) = e / e.sum();
    }
    Var out = push(std::move(y), needs(a), {});
    const int oi = out.idx, ai = a.idx;
    nodes_[oi].back = [oi, ai](Tape& t) {
        if (!t.nodes_[ai].needs_grad) return;
        const Mat& y2 = t.nodes_[oi].val;
        const Mat& g = t.grad_ref(oi);
        Mat dx(y2.rows(), y2.cols());
        for (long i = 0; i < y2.rows(); ++i) {
            const double dot = g.row(i).cwiseProduct(y2.row(i)).sum();
            dx.row(i) = y2.row(i).cwiseProduct(g.row(i).array() - dot);
        }
        t.grad_ref(ai) += dx;
    };
    return out;
}

Var Tape::attention_heads(Var q, Var k, Var v, int heads, int batch) {
    const Mat& qv = q.val();
    const Mat& kv = k.val();
    const Mat& vv = v.val();
    const long dim = qv.cols();
    if (kv.cols() != dim || vv.cols() != dim || kv.rows() != vv.rows())
        throw ValidationError("attention: q/k/v dim mismatch");
    if (heads <= 0 || dim % heads != 0)
        throw ValidationError("attention: dim must divide by heads");
    if (batch <= 0 || qv.rows() % batch != 0 || kv.rows() % batch != 0)
        throw ValidationError("attention: rows must divide by batch");
    const long nq = qv.rows() / batch;
    const long nk = kv.rows() / batch;
    const long dh = dim / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    auto probs = std::make_shared<std::vector<Mat>>();
    probs->reserve(static_cast<size_t>(batch) * heads);
    Mat out(qv.rows(), dim);
    for (int b = 0; b < batch; ++b) {
        for (int h = 0; h < heads; ++h) {
            const auto qb = qv.block(b * nq, h * dh, nq, dh);
            const auto kb = kv.block(b * nk, h * dh, nk, dh);
            const auto vb = vv.block(b * nk, h * dh, nk, dh);
            Mat scores = scale * (qb * kb.transpose());
            for (long i = 0; i < scores.rows(); ++i) {
                const double mx = scores.row(i).maxCoeff();
                Eigen::RowVectorXd e = (scores.row(i).array() - mx).exp();
                scores.row(i) = e / e.sum();
            }
            out.block(b * nq, h * dh, nq, dh) = scores * vb;
            probs->push_back(std::move(scores));
        }
    }
    Var result = push(std::move(out), needs(q) || needs(k) || needs(v), {});
    const int oi = result.idx, qi = q.idx, ki = k.idx, vi = v.idx;
    nodes_[oi].back = [oi, qi, ki, vi, heads, batch, nq, nk, dh, scale, probs](Tape& t) {
        const Mat& g = t.grad_ref(oi);
        const Mat& qv2 = t.nodes_[qi].val;
        const Mat& kv2 = t.nodes_[ki].val;
        const Mat& vv2 = t.nodes_[vi].val;
        const bool need_q = t.nodes_[qi].needs_grad;
        const bool need_k = t.nodes_[ki].needs_grad;
        const bool need_v = t.nodes_[vi].needs_grad;
        for (int b = 0; b < batch; ++b) {
            for (int h = 0; h < heads; ++h) {
                const Mat& a = (*probs)[static_cast<size_t>(b) * heads + h];
                const auto go = g.block(b * nq, h * dh, nq, dh);
                const auto vb = vv2.block(b * nk, h * dh, nk, dh);
                if (need_v)
                    t.grad_ref(vi).block(b * nk, h * dh, nk, dh) += a.transpose() * go;
                if (!need_q && !need_k) continue;
                Mat da = go * vb.transpose(); // nq x nk
                Mat ds(nq, nk);
                for (long i = 0; i < nq; ++i) {
                    const double dot = da.row(i).cwiseProduct(a.row(i)).sum();
                    ds.row(i) = a.row(i).cwiseProduct(da.row(i).array() - dot);
                }
                if (need_q)
                    t.grad_ref(qi).block(b * nq, h * dh, nq, dh) +=
                        scale * (ds * kv2.block(b * nk, h * dh, nk, dh));
                if (need_k)
                    t.grad_ref(ki).block(b * nk, h * dh, nk, dh) +=
                        scale * (ds.transpose() * qv2.block(b * nq, h * dh, nq, dh));
            }
        }
    };
    return result;
}

Var Tape::gelu(Var a) {
    const Mat& x = a.val();
    Mat y = x.unaryExpr([](double v) { return 0.5 * v * (1.0 + std::erf(v * M_SQRT1_2)); });
    Var out = push(std::move(y), needs(a), {});
    const int oi = out.idx, ai = a.idx;
    nodes_[oi].back = [oi, ai](Tape& t) {
        if (!t.nodes_[ai].needs_grad) return;
        const Mat& xv = t.nodes_[ai].val;
        Mat d = xv.unaryExpr([](double v) {
            const double cdf = 0.5 * (1.0 + std::erf(v * M_SQRT1_2));
            const double pdf = 0.3989422804014326779 * std::exp(-0.5 * v * v);
            return cdf + v * pdf;
        });
        t.grad_ref(ai) += t.grad_ref(oi).cwiseProduct(d);
    };
    return out;
}

Var Tape::exp(Var a) {
    Var out = push(a.val().array().exp().matrix(), needs(a), {});
    const int oi = out.idx, ai = a.idx;
    nodes_[oi].back = [oi, ai](Tape& t) {
        if (t.nodes_[ai].needs_grad)
            t.grad_ref(ai) += t.grad_ref(oi).cwiseProduct(t.nodes_[oi].val);
    };
    return out;
}

Var Tape::clamp(Var a, double lo, double hi) {
    const Mat& x = a.val();
    Mat y = x.unaryExpr([lo, hi](double v) { return std::min(std::max(v, lo), hi); });
    Var out = push(std::move(y), needs(a), {});
    const int oi = out.idx, ai = a.idx;
    nodes_[oi].back = [oi, ai, lo, hi](Tape& t) {
        if (!t.nodes_[ai].needs_grad) return;
        const Mat& xv = t.nodes_[ai].val;
        Mat mask = xv.unaryExpr([lo, hi](double v) { return (v >= lo && v <= hi) ? 1.0 : 0.0; });
        t.grad_ref(ai) += t.grad_ref(oi).cwiseProduct(mask);
    };
    return out;
}

Var Tape::mean_all(Var a) {
    Mat v(1, 1);
    v(0, 0) = a.val().mean();
    Var out = push(std::move(v), needs(a), {});
    const int oi = out.idx, ai = a.idx;
    nodes_[oi].back = [oi, ai](Tape& t) {
        if (!t.nodes_[ai].needs_grad) return;
        const double g = t.grad_ref(oi)(0, 0) / static_cast<double>(t.nodes_[ai].val.size());
        t.grad_ref(ai).array() += g;
    };
    return out;
}

Var Tape::huber_against(Var pred, const Mat& target, double delta) {
    check_same_shape(pred.val(), target, "huber");
    if (!(delta > 0)) throw ValidationError("huber: delta must be positive");
    const Mat e = pred.val() - target;
    double acc = 0;
    for (long i = 0; i < e.size(); ++i) {
        const double ae = std::abs(e.data()[i]);
        acc += ae <= delta ? 0.5 * ae * ae : delta * (ae - 0.5 * delta);
    }
    Mat v(1, 1);
    v(0, 0) = acc / static_cast<double>(e.size());
    Var out = push(std::move(v), needs(pred), {});
    const int oi = out.idx, pi = pred.idx;
    auto e_p = std::make_shared<Mat>(e);
    nodes_[oi].back = [oi, pi, e_p, delta](Tape& t) {
        if (!t.nodes_[pi].needs_grad) return;
        const double g = t.grad_ref(oi)(0, 0) / static_cast<double>(e_p->size());
        Mat d = e_p->unaryExpr([delta](double v2) {
            if (std::abs(v2) <= delta) return v2;
            return v2 > 0 ? delta : -delta;
        });
        t.grad_ref(pi) += g * d;
    };
    return out;
}

Var Tape::mse_against(Var pred, const Mat& target) {
    check_same_shape(pred.val(), target, "mse");
    const Mat e = pred.val() - target;
    Mat v(1, 1);
    v(0, 0) = e.squaredNorm() / static_cast<double>(e.size());
    Var out = push(std::move(v), needs(pred), {});
    const int oi = out.idx, pi = pred.idx;
    auto e_p = std::make_shared<Mat>(e);
    nodes_[oi].back = [oi, pi, e_p](Tape& t) {
        if (!t.nodes_[pi].needs_grad) return;
        const double g = 2.0 * t.grad_ref(oi)(0, 0) / static_cast<double>(e_p->size());
        t.grad_ref(pi) += g * (*e_p);
    };
    return out;
}

Var Tape::kl_standard_normal(Var mu, Var logvar) {
    check_same_shape(mu.val(), logvar.val(), "kl");
    const Mat& m = mu.val();
    const Mat& lv = logvar.val();
    const double n = static_cast<double>(m.size());
    const double kl =
        0.5 * (lv.array().exp() + m.array().square() - 1.0 - lv.array()).sum() / n;
    Mat v(1, 1);
    v(0, 0) = kl;
    Var out = push(std::move(v), needs(mu) || needs(logvar), {});
    const int oi = out.idx, mi = mu.idx, li = logvar.idx;
    nodes_[oi].back = [oi, mi, li, n](Tape& t) {
        const double g = t.grad_ref(oi)(0, 0);
        if (t.nodes_[mi].needs_grad) t.grad_ref(mi) += (g / n) * t.nodes_[mi].val;
        if (t.nodes_[li].needs_grad)
            t.grad_ref(li) +=
                (0.5 * g / n) * (t.nodes_[li].val.array().exp() - 1.0).matrix();
    };
    return out;
}

void Tape::backward(Var loss) {
    if (loss.val().rows() != 1 || loss.val().cols() != 1)
        throw ValidationError("backward: loss must be 1x1");
    for (auto& n : nodes_) {
        n.grad.resize(n.val.rows(), n.val.cols());
        n.grad.setZero();
    }
    nodes_[loss.idx].grad(0, 0) = 1.0;
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
        if (nodes_[i].back && nodes_[i].needs_grad) nodes_[i].back(*this);
    }
}

void Tape::clear() { nodes_.clear(); }

} // namespace posegen::nn
