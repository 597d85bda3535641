#include "rpvae/nn/ops.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rpvae::nn {

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                                    " vs " + shape_string(b.shape()));
    }
}

void require_rank(const Var& a, std::size_t rank, const char* op, const char* what) {
    if (a.shape().size() != rank) {
        throw std::invalid_argument(std::string(op) + ": " + what + " must have rank " +
                                    std::to_string(rank) + ", got " + shape_string(a.shape()));
    }
}

// gi[i] += g[i] * deriv(i) for a unary elementwise op.
template <typename Deriv>
void accumulate_unary(Tape& t, std::size_t in, std::size_t out, Deriv deriv) {
    if (!t.requires_grad(in)) return;
    const auto g = t.grad(out).data();
    auto gi = t.grad(in).data();
    for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += g[i] * deriv(i);
}

}  // namespace

Var add(Var a, Var b) {
    require_same_shape(a, b, "add");
    Tensor out(a.shape());
    const auto x = a.value().data();
    const auto y = b.value().data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
    const std::size_t ia = a.id(), ib = b.id();
    return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
        accumulate_unary(t, ia, self, [](std::size_t) { return 1.0; });
        accumulate_unary(t, ib, self, [](std::size_t) { return 1.0; });
    });
}

Var sub(Var a, Var b) {
    require_same_shape(a, b, "sub");
    Tensor out(a.shape());
    const auto x = a.value().data();
    const auto y = b.value().data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
    const std::size_t ia = a.id(), ib = b.id();
    return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
        accumulate_unary(t, ia, self, [](std::size_t) { return 1.0; });
        accumulate_unary(t, ib, self, [](std::size_t) { return -1.0; });
    });
}

Var mul(Var a, Var b) {
    require_same_shape(a, b, "mul");
    Tensor out(a.shape());
    const auto x = a.value().data();
    const auto y = b.value().data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
    const std::size_t ia = a.id(), ib = b.id();
    return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
        const auto xv = t.value(ia).data();
        const auto yv = t.value(ib).data();
        accumulate_unary(t, ia, self, [yv](std::size_t i) { return yv[i]; });
        accumulate_unary(t, ib, self, [xv](std::size_t i) { return xv[i]; });
    });
}

Var scale(Var a, double factor) {
    Tensor out(a.shape());
    const auto x = a.value().data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * x[i];
    const std::size_t ia = a.id();
    return a.tape().record(std::move(out), {a}, [ia, factor](Tape& t, std::size_t self) {
        accumulate_unary(t, ia, self, [factor](std::size_t) { return factor; });
    });
}

Var exp(Var a) {
    Tensor out(a.shape());
    const auto x = a.value().data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(x[i]);
    const std::size_t ia = a.id();
    return a.tape().record(std::move(out), {a}, [ia](Tape& t, std::size_t self) {
        const auto y = t.value(self).data();
        accumulate_unary(t, ia, self, [y](std::size_t i) { return y[i]; });
    });
}

Var relu(Var a) {
    Tensor out(a.shape());
    const auto x = a.value().data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
    const std::size_t ia = a.id();
    return a.tape().record(std::move(out), {a}, [ia](Tape& t, std::size_t self) {
        const auto xv = t.value(ia).data();
        accumulate_unary(t, ia, self, [xv](std::size_t i) { return xv[i] > 0.0 ? 1.0 : 0.0; });
    });
}

Var sigmoid(Var a) {
    Tensor out(a.shape());
    const auto x = a.value().data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        // Split on sign so exp() never overflows.
        if (x[i] >= 0.0) {
            out[i] = 1.0 / (1.0 + std::exp(-x[i]));
        } else {
            const double e = std::exp(x[i]);
            out[i] = e / (1.0 + e);
        }
    }
    const std::size_t ia = a.id();
    return a.tape().record(std::move(out), {a}, [ia](Tape& t, std::size_t self) {
        const auto y = t.value(self).data();
        accumulate_unary(t, ia, self, [y](std::size_t i) { return y[i] * (1.0 - y[i]); });
    });
}

Var sum(Var a) {
    double acc = 0.0;
    for (double v : a.value().data()) acc += v;
    const std::size_t ia = a.id();
    return a.tape().record(Tensor::scalar(acc), {a}, [ia](Tape& t, std::size_t self) {
        if (!t.requires_grad(ia)) return;
        const double g = t.grad(self)[0];
        for (double& gi : t.grad(ia).data()) gi += g;
    });
}

Var mean(Var a) {
    const double inv = 1.0 / static_cast<double>(a.value().size());
    double acc = 0.0;
    for (double v : a.value().data()) acc += v;
    const std::size_t ia = a.id();
    return a.tape().record(Tensor::scalar(acc * inv), {a}, [ia, inv](Tape& t, std::size_t self) {
        if (!t.requires_grad(ia)) return;
        const double g = t.grad(self)[0] * inv;
        for (double& gi : t.grad(ia).data()) gi += g;
    });
}

Var reshape(Var a, Shape shape) {
    Tensor out = a.value().reshaped(std::move(shape));
    const std::size_t ia = a.id();
    return a.tape().record(std::move(out), {a}, [ia](Tape& t, std::size_t self) {
        if (!t.requires_grad(ia)) return;
        const auto g = t.grad(self).data();
        auto gi = t.grad(ia).data();
        for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += g[i];
    });
}

Var dense(Var x, Var weight, Var bias) {
    require_rank(x, 2, "dense", "input");
    require_rank(weight, 2, "dense", "weight");
    require_rank(bias, 1, "dense", "bias");
    const std::size_t n = x.shape()[0], in = x.shape()[1], outd = weight.shape()[0];
    if (weight.shape()[1] != in || bias.shape()[0] != outd) {
        throw std::invalid_argument("dense: input " + shape_string(x.shape()) + ", weight " +
                                    shape_string(weight.shape()) + ", bias " +
                                    shape_string(bias.shape()) + " are incompatible");
    }
    Tensor out({n, outd});
    const double* xv = x.value().data().data();
    const double* w = weight.value().data().data();
    const double* b = bias.value().data().data();
    double* y = out.data().data();
    for (std::size_t r = 0; r < n; ++r) {
        const double* xr = xv + r * in;
        for (std::size_t o = 0; o < outd; ++o) {
            const double* wo = w + o * in;
            double acc = 0.0;
            for (std::size_t i = 0; i < in; ++i) acc += wo[i] * xr[i];
            y[r * outd + o] = acc + b[o];
        }
    }
    const std::size_t ix = x.id(), iw = weight.id(), ib = bias.id();
    return x.tape().record(std::move(out), {x, weight, bias},
                           [ix, iw, ib, n, in, outd](Tape& t, std::size_t self) {
        const double* g = t.grad(self).data().data();
        if (t.requires_grad(ix)) {
            const double* w = t.value(iw).data().data();
            double* gx = t.grad(ix).data().data();
            for (std::size_t r = 0; r < n; ++r) {
                double* gxr = gx + r * in;
                for (std::size_t o = 0; o < outd; ++o) {
                    const double go = g[r * outd + o];
                    if (go == 0.0) continue;
                    const double* wo = w + o * in;
                    for (std::size_t i = 0; i < in; ++i) gxr[i] += go * wo[i];
                }
            }
        }
        if (t.requires_grad(iw)) {
            const double* xv = t.value(ix).data().data();
            double* gw = t.grad(iw).data().data();
            for (std::size_t r = 0; r < n; ++r) {
                const double* xr = xv + r * in;
                for (std::size_t o = 0; o < outd; ++o) {
                    const double go = g[r * outd + o];
                    if (go == 0.0) continue;
                    double* gwo = gw + o * in;
                    for (std::size_t i = 0; i < in; ++i) gwo[i] += go * xr[i];
                }
            }
        }
        if (t.requires_grad(ib)) {
            double* gb = t.grad(ib).data().data();
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t o = 0; o < outd; ++o) gb[o] += g[r * outd + o];
            }
        }
    });
}

std::size_t conv_output_extent(std::size_t input, std::size_t kernel, std::size_t stride) {
    if (stride == 0 || kernel == 0 || input < kernel) {
        throw std::invalid_argument("conv2d: input extent " + std::to_string(input) +
                                    " too small for kernel " + std::to_string(kernel));
    }
    return (input - kernel) / stride + 1;
}

Var conv2d(Var x, Var kernel, Var bias, std::size_t stride) {
    require_rank(x, 4, "conv2d", "input");
    require_rank(kernel, 4, "conv2d", "kernel");
    require_rank(bias, 1, "conv2d", "bias");
    const Shape& xs = x.shape();
    const Shape& ks = kernel.shape();
    const std::size_t n = xs[0], c = xs[1], h = xs[2], w = xs[3];
    const std::size_t oc = ks[0], kh = ks[2], kw = ks[3];
    if (ks[1] != c || bias.shape()[0] != oc) {
        throw std::invalid_argument("conv2d: input " + shape_string(xs) + ", kernel " + shape_string(ks) +
                                    ", bias " + shape_string(bias.shape()) + " are incompatible");
    }
    const std::size_t ho = conv_output_extent(h, kh, stride);
    const std::size_t wo = conv_output_extent(w, kw, stride);

    Tensor out({n, oc, ho, wo});
    const double* xv = x.value().data().data();
    const double* kv = kernel.value().data().data();
    const double* bv = bias.value().data().data();
    double* y = out.data().data();
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t o = 0; o < oc; ++o) {
            double* yo = y + (s * oc + o) * ho * wo;
            for (std::size_t p = 0; p < ho * wo; ++p) yo[p] = bv[o];
            for (std::size_t ci = 0; ci < c; ++ci) {
                const double* xc = xv + (s * c + ci) * h * w;
                const double* kc = kv + (o * c + ci) * kh * kw;
                for (std::size_t dy = 0; dy < kh; ++dy) {
                    for (std::size_t dx = 0; dx < kw; ++dx) {
                        const double kval = kc[dy * kw + dx];
                        for (std::size_t oy = 0; oy < ho; ++oy) {
                            const double* xrow = xc + (oy * stride + dy) * w + dx;
                            double* yrow = yo + oy * wo;
                            for (std::size_t ox = 0; ox < wo; ++ox) yrow[ox] += kval * xrow[ox * stride];
                        }
                    }
                }
            }
        }
    }

    const std::size_t ix = x.id(), ik = kernel.id(), ib = bias.id();
    return x.tape().record(std::move(out), {x, kernel, bias},
                           [=](Tape& t, std::size_t self) {
        const double* g = t.grad(self).data().data();
        const bool want_x = t.requires_grad(ix);
        const bool want_k = t.requires_grad(ik);
        const double* xv = t.value(ix).data().data();
        const double* kv = t.value(ik).data().data();
        double* gx = want_x ? t.grad(ix).data().data() : nullptr;
        double* gk = want_k ? t.grad(ik).data().data() : nullptr;
        for (std::size_t s = 0; s < n; ++s) {
            for (std::size_t o = 0; o < oc; ++o) {
                const double* go = g + (s * oc + o) * ho * wo;
                for (std::size_t ci = 0; ci < c; ++ci) {
                    const std::size_t xoff = (s * c + ci) * h * w;
                    const std::size_t koff = (o * c + ci) * kh * kw;
                    for (std::size_t dy = 0; dy < kh; ++dy) {
                        for (std::size_t dx = 0; dx < kw; ++dx) {
                            const double kval = kv[koff + dy * kw + dx];
                            double kacc = 0.0;
                            for (std::size_t oy = 0; oy < ho; ++oy) {
                                const std::size_t row = xoff + (oy * stride + dy) * w + dx;
                                const double* grow = go + oy * wo;
                                if (want_k) {
                                    const double* xrow = xv + row;
                                    for (std::size_t ox = 0; ox < wo; ++ox) kacc += grow[ox] * xrow[ox * stride];
                                }
                                if (want_x) {
                                    double* gxrow = gx + row;
                                    for (std::size_t ox = 0; ox < wo; ++ox) gxrow[ox * stride] += grow[ox] * kval;
                                }
                            }
                            if (want_k) gk[koff + dy * kw + dx] += kacc;
                        }
                    }
                }
            }
        }
        if (t.requires_grad(ib)) {
            double* gb = t.grad(ib).data().data();
            for (std::size_t s = 0; s < n; ++s) {
                for (std::size_t o = 0; o < oc; ++o) {
                    const double* go = g + (s * oc + o) * ho * wo;
                    double acc = 0.0;
                    for (std::size_t p = 0; p < ho * wo; ++p) acc += go[p];
                    gb[o] += acc;
                }
            }
        }
    });
}

Var reparameterize(Var mu, Var logvar, const Tensor& eps) {
    require_same_shape(mu, logvar, "reparameterize");
    if (eps.shape() != mu.shape()) {
        throw std::invalid_argument("reparameterize: noise shape " + shape_string(eps.shape()) +
                                    " does not match " + shape_string(mu.shape()));
    }
    Tensor out(mu.shape());
    const auto m = mu.value().data();
    const auto lv = logvar.value().data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = m[i] + std::exp(0.5 * lv[i]) * eps[i];
    const std::size_t imu = mu.id(), ilv = logvar.id();
    return mu.tape().record(std::move(out), {mu, logvar}, [imu, ilv, eps](Tape& t, std::size_t self) {
        accumulate_unary(t, imu, self, [](std::size_t) { return 1.0; });
        const auto lv = t.value(ilv).data();
        accumulate_unary(t, ilv, self, [&](std::size_t i) { return 0.5 * std::exp(0.5 * lv[i]) * eps[i]; });
    });
}

Var mse(Var pred, Var target) {
    require_same_shape(pred, target, "mse");
    const auto p = pred.value().data();
    const auto q = target.value().data();
    const double inv = 1.0 / static_cast<double>(p.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - q[i];
        acc += d * d;
    }
    const std::size_t ip = pred.id(), iq = target.id();
    return pred.tape().record(Tensor::scalar(acc * inv), {pred, target}, [ip, iq, inv](Tape& t, std::size_t self) {
        const double g = t.grad(self)[0] * 2.0 * inv;
        const auto p = t.value(ip).data();
        const auto q = t.value(iq).data();
        if (t.requires_grad(ip)) {
            auto gp = t.grad(ip).data();
            for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g * (p[i] - q[i]);
        }
        if (t.requires_grad(iq)) {
            auto gq = t.grad(iq).data();
            for (std::size_t i = 0; i < gq.size(); ++i) gq[i] -= g * (p[i] - q[i]);
        }
    });
}

Var gaussian_kl(Var mu, Var logvar) {
    require_same_shape(mu, logvar, "gaussian_kl");
    require_rank(mu, 2, "gaussian_kl", "mu");
    const std::size_t rows = mu.shape()[0];
    const auto m = mu.value().data();
    const auto lv = logvar.value().data();
    double acc = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) acc += 1.0 + lv[i] - m[i] * m[i] - std::exp(lv[i]);
    const double inv_rows = 1.0 / static_cast<double>(rows);
    const std::size_t imu = mu.id(), ilv = logvar.id();
    return mu.tape().record(Tensor::scalar(-0.5 * acc * inv_rows), {mu, logvar},
                            [imu, ilv, inv_rows](Tape& t, std::size_t self) {
        const double g = t.grad(self)[0] * inv_rows;
        if (t.requires_grad(imu)) {
            const auto m = t.value(imu).data();
            auto gm = t.grad(imu).data();
            for (std::size_t i = 0; i < gm.size(); ++i) gm[i] += g * m[i];
        }
        if (t.requires_grad(ilv)) {
            const auto lv = t.value(ilv).data();
            auto gl = t.grad(ilv).data();
            for (std::size_t i = 0; i < gl.size(); ++i) gl[i] += g * 0.5 * (std::exp(lv[i]) - 1.0);
        }
    });
}

}  // namespace rpvae::nn
