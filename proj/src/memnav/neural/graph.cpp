#include "memnav/neural/graph.hpp"

#include <cmath>
#include <cstring>

#include "memnav/core/errors.hpp"
#include "memnav/kernels/kernels.hpp"

namespace memnav::neural {

namespace ker = memnav::kernels;

namespace {

void check_finite(const Tensor& t, const char* op) {
    for (const double x : t.v) {
        if (!std::isfinite(x)) throw NumericalError(std::string(op) + ": non-finite output");
    }
}

void require(bool cond, const char* op, const char* what) {
    if (!cond) throw RuntimeError(std::string(op) + ": " + what);
}

} // namespace

TensorPtr Graph::out(std::vector<std::size_t> shape, const char*) {
    return make_tensor(std::move(shape));
}

TensorPtr Graph::constant(std::vector<std::size_t> shape, const std::vector<double>& values) {
    require(shape_numel(shape) == values.size(), "constant", "shape/value size mismatch");
    return make_tensor(std::move(shape), values);
}

TensorPtr Graph::scalar(double value) { return make_tensor({1}, {value}); }

TensorPtr Graph::affine(const TensorPtr& x, const TensorPtr& W, const TensorPtr& b) {
    require(x->shape.size() == 2, "affine", "x must be [B,N]");
    require(W->shape.size() == 2, "affine", "W must be [M,N]");
    const std::size_t B = x->dim(0), N = x->dim(1), M = W->dim(0);
    require(W->dim(1) == N, "affine", "W/x inner dim mismatch");
    require(b->numel() == M, "affine", "bias size mismatch");

    auto y = out({B, M}, "affine");
    for (std::size_t i = 0; i < B; ++i) {
        const double* xi = x->v.data() + i * N;
        double* yi = y->v.data() + i * M;
        for (std::size_t m = 0; m < M; ++m)
            yi[m] = ker::dot(W->v.data() + m * N, xi, N) + b->v[m];
    }
    check_finite(*y, "affine");

    record([x, W, b, y, B, N, M] {
        for (std::size_t i = 0; i < B; ++i) {
            const double* gyi = y->g.data() + i * M;
            const double* xi = x->v.data() + i * N;
            double* gxi = x->g.data() + i * N;
            for (std::size_t m = 0; m < M; ++m) {
                const double gy = gyi[m];
                if (gy == 0.0) continue;
                ker::axpy(gy, W->v.data() + m * N, gxi, N);
                ker::axpy(gy, xi, W->g.data() + m * N, N);
                b->g[m] += gy;
            }
        }
    });
    return y;
}

TensorPtr Graph::conv1d(const TensorPtr& x, const TensorPtr& W, const TensorPtr& b, int kernel,
                        int stride, int pad) {
    require(x->shape.size() == 3, "conv1d", "x must be [B,L,C]");
    const std::size_t B = x->dim(0), L = x->dim(1), C = x->dim(2);
    const std::size_t F = W->dim(0);
    const auto K = static_cast<std::size_t>(kernel);
    require(W->shape.size() == 2 && W->dim(1) == K * C, "conv1d", "W must be [F,K*C]");
    require(b->numel() == F, "conv1d", "bias size mismatch");
    const std::size_t Lp = L + 2 * static_cast<std::size_t>(pad);
    require(Lp >= K, "conv1d", "kernel larger than padded input");
    const std::size_t Lout = (Lp - K) / static_cast<std::size_t>(stride) + 1;

    auto y = out({B, Lout, F}, "conv1d");
    // padded copies are kept for the backward weight update
    auto xp = std::make_shared<std::vector<double>>(B * Lp * C, 0.0);
    for (std::size_t i = 0; i < B; ++i) {
        std::memcpy(xp->data() + (i * Lp + static_cast<std::size_t>(pad)) * C,
                    x->v.data() + i * L * C, L * C * sizeof(double));
    }
    for (std::size_t i = 0; i < B; ++i) {
        const double* xpi = xp->data() + i * Lp * C;
        double* yi = y->v.data() + i * Lout * F;
        for (std::size_t j = 0; j < Lout; ++j) {
            const double* patch = xpi + j * static_cast<std::size_t>(stride) * C;
            double* yrow = yi + j * F;
            for (std::size_t f = 0; f < F; ++f)
                yrow[f] = ker::dot(W->v.data() + f * K * C, patch, K * C) + b->v[f];
        }
    }
    check_finite(*y, "conv1d");

    const std::size_t P = static_cast<std::size_t>(pad);
    const std::size_t S = static_cast<std::size_t>(stride);
    record([x, W, b, y, xp, B, L, C, F, K, Lp, Lout, P, S] {
        std::vector<double> gxp(Lp * C);
        for (std::size_t i = 0; i < B; ++i) {
            std::fill(gxp.begin(), gxp.end(), 0.0);
            const double* xpi = xp->data() + i * Lp * C;
            const double* gyi = y->g.data() + i * Lout * F;
            for (std::size_t j = 0; j < Lout; ++j) {
                const double* patch = xpi + j * S * C;
                double* gpatch = gxp.data() + j * S * C;
                const double* gyrow = gyi + j * F;
                for (std::size_t f = 0; f < F; ++f) {
                    const double gy = gyrow[f];
                    if (gy == 0.0) continue;
                    ker::axpy(gy, W->v.data() + f * K * C, gpatch, K * C);
                    ker::axpy(gy, patch, W->g.data() + f * K * C, K * C);
                    b->g[f] += gy;
                }
            }
            ker::axpy(1.0, gxp.data() + P * C, x->g.data() + i * L * C, L * C);
        }
    });
    return y;
}

TensorPtr Graph::deconv1d(const TensorPtr& x, const TensorPtr& W, const TensorPtr& b, int kernel,
                          int stride, int pad) {
    require(x->shape.size() == 3, "deconv1d", "x must be [B,L,C]");
    const std::size_t B = x->dim(0), L = x->dim(1), C = x->dim(2);
    const auto K = static_cast<std::size_t>(kernel);
    require(W->shape.size() == 2 && W->dim(0) == C, "deconv1d", "W must be [C,K*F]");
    const std::size_t F = W->dim(1) / K;
    require(W->dim(1) == K * F, "deconv1d", "W cols must be K*F");
    require(b->numel() == F, "deconv1d", "bias size mismatch");
    const std::size_t S = static_cast<std::size_t>(stride);
    const std::size_t P = static_cast<std::size_t>(pad);
    const std::size_t Lfull = (L - 1) * S + K; // before trimming pad
    require(Lfull >= 2 * P, "deconv1d", "pad too large");
    const std::size_t Lout = Lfull - 2 * P;

    auto y = out({B, Lout, F}, "deconv1d");
    std::vector<double> ypad(Lfull * F);
    for (std::size_t i = 0; i < B; ++i) {
        std::fill(ypad.begin(), ypad.end(), 0.0);
        const double* xi = x->v.data() + i * L * C;
        for (std::size_t l = 0; l < L; ++l) {
            double* win = ypad.data() + l * S * F;
            const double* xrow = xi + l * C;
            for (std::size_t c = 0; c < C; ++c) {
                if (xrow[c] == 0.0) continue;
                ker::axpy(xrow[c], W->v.data() + c * K * F, win, K * F);
            }
        }
        double* yi = y->v.data() + i * Lout * F;
        for (std::size_t o = 0; o < Lout; ++o)
            for (std::size_t f = 0; f < F; ++f) yi[o * F + f] = ypad[(o + P) * F + f] + b->v[f];
    }
    check_finite(*y, "deconv1d");

    record([x, W, b, y, B, L, C, F, K, S, P, Lfull, Lout] {
        std::vector<double> gypad(Lfull * F);
        for (std::size_t i = 0; i < B; ++i) {
            std::fill(gypad.begin(), gypad.end(), 0.0);
            const double* gyi = y->g.data() + i * Lout * F;
            for (std::size_t o = 0; o < Lout; ++o)
                for (std::size_t f = 0; f < F; ++f) {
                    gypad[(o + P) * F + f] = gyi[o * F + f];
                    b->g[f] += gyi[o * F + f];
                }
            const double* xi = x->v.data() + i * L * C;
            double* gxi = x->g.data() + i * L * C;
            for (std::size_t l = 0; l < L; ++l) {
                const double* gwin = gypad.data() + l * S * F;
                for (std::size_t c = 0; c < C; ++c) {
                    gxi[l * C + c] += ker::dot(W->v.data() + c * K * F, gwin, K * F);
                    const double xv = xi[l * C + c];
                    if (xv != 0.0) ker::axpy(xv, gwin, W->g.data() + c * K * F, K * F);
                }
            }
        }
    });
    return y;
}

TensorPtr Graph::relu(const TensorPtr& x) {
    auto y = out(x->shape, "relu");
    for (std::size_t i = 0; i < x->numel(); ++i) y->v[i] = x->v[i] > 0.0 ? x->v[i] : 0.0;
    record([x, y] {
        for (std::size_t i = 0; i < x->v.size(); ++i)
            if (x->v[i] > 0.0) x->g[i] += y->g[i];
    });
    return y;
}

TensorPtr Graph::sigmoid(const TensorPtr& x) {
    auto y = out(x->shape, "sigmoid");
    for (std::size_t i = 0; i < x->numel(); ++i) y->v[i] = 1.0 / (1.0 + std::exp(-x->v[i]));
    check_finite(*y, "sigmoid");
    record([x, y] {
        for (std::size_t i = 0; i < x->v.size(); ++i)
            x->g[i] += y->g[i] * y->v[i] * (1.0 - y->v[i]);
    });
    return y;
}

TensorPtr Graph::tanh_(const TensorPtr& x) {
    auto y = out(x->shape, "tanh");
    for (std::size_t i = 0; i < x->numel(); ++i) y->v[i] = std::tanh(x->v[i]);
    record([x, y] {
        for (std::size_t i = 0; i < x->v.size(); ++i)
            x->g[i] += y->g[i] * (1.0 - y->v[i] * y->v[i]);
    });
    return y;
}

TensorPtr Graph::exp_(const TensorPtr& x) {
    auto y = out(x->shape, "exp");
    for (std::size_t i = 0; i < x->numel(); ++i) y->v[i] = std::exp(x->v[i]);
    check_finite(*y, "exp");
    record([x, y] {
        for (std::size_t i = 0; i < x->v.size(); ++i) x->g[i] += y->g[i] * y->v[i];
    });
    return y;
}

Graph::LstmOut Graph::lstm_cell(const TensorPtr& x, const TensorPtr& h, const TensorPtr& c,
                                const TensorPtr& Wx, const TensorPtr& Wh, const TensorPtr& b) {
    require(x->shape.size() == 2 && h->shape.size() == 2 && c->shape.size() == 2, "lstm_cell",
            "x/h/c must be [B,*]");
    const std::size_t B = x->dim(0), In = x->dim(1), H = h->dim(1);
    require(h->dim(0) == B && c->dim(0) == B && c->dim(1) == H, "lstm_cell", "state shape");
    require(Wx->shape.size() == 2 && Wx->dim(0) == 4 * H && Wx->dim(1) == In, "lstm_cell",
            "Wx must be [4H,In]");
    require(Wh->shape.size() == 2 && Wh->dim(0) == 4 * H && Wh->dim(1) == H, "lstm_cell",
            "Wh must be [4H,H]");
    require(b->numel() == 4 * H, "lstm_cell", "bias size");

    auto hn = out({B, H}, "lstm_cell");
    auto cn = out({B, H}, "lstm_cell");
    // activations saved for backward: i, f, g, o, tanh(c')
    auto acts = std::make_shared<std::vector<double>>(B * 5 * H);
    for (std::size_t r = 0; r < B; ++r) {
        const double* xr = x->v.data() + r * In;
        const double* hr = h->v.data() + r * H;
        const double* cr = c->v.data() + r * H;
        double* A = acts->data() + r * 5 * H;
        double* ig = A;
        double* fg = A + H;
        double* gg = A + 2 * H;
        double* og = A + 3 * H;
        double* tc = A + 4 * H;
        for (std::size_t m = 0; m < 4 * H; ++m) {
            const double pre = ker::dot(Wx->v.data() + m * In, xr, In) +
                               ker::dot(Wh->v.data() + m * H, hr, H) + b->v[m];
            const std::size_t block = m / H, idx = m % H;
            if (block == 2)
                A[block * H + idx] = std::tanh(pre);
            else
                A[block * H + idx] = 1.0 / (1.0 + std::exp(-pre));
        }
        double* cnr = cn->v.data() + r * H;
        double* hnr = hn->v.data() + r * H;
        for (std::size_t k = 0; k < H; ++k) {
            cnr[k] = fg[k] * cr[k] + ig[k] * gg[k];
            tc[k] = std::tanh(cnr[k]);
            hnr[k] = og[k] * tc[k];
        }
    }
    check_finite(*hn, "lstm_cell");
    check_finite(*cn, "lstm_cell");

    record([x, h, c, Wx, Wh, b, hn, cn, acts, B, In, H] {
        std::vector<double> dz(4 * H);
        for (std::size_t r = 0; r < B; ++r) {
            const double* A = acts->data() + r * 5 * H;
            const double* ig = A;
            const double* fg = A + H;
            const double* gg = A + 2 * H;
            const double* og = A + 3 * H;
            const double* tc = A + 4 * H;
            const double* ghn = hn->g.data() + r * H;
            const double* gcn = cn->g.data() + r * H;
            const double* cr = c->v.data() + r * H;
            double* gcr = c->g.data() + r * H;
            for (std::size_t k = 0; k < H; ++k) {
                const double dct = gcn[k] + ghn[k] * og[k] * (1.0 - tc[k] * tc[k]);
                const double dzo = ghn[k] * tc[k] * og[k] * (1.0 - og[k]);
                const double dzi = dct * gg[k] * ig[k] * (1.0 - ig[k]);
                const double dzf = dct * cr[k] * fg[k] * (1.0 - fg[k]);
                const double dzg = dct * ig[k] * (1.0 - gg[k] * gg[k]);
                gcr[k] += dct * fg[k];
                dz[k] = dzi;
                dz[H + k] = dzf;
                dz[2 * H + k] = dzg;
                dz[3 * H + k] = dzo;
            }
            const double* xr = x->v.data() + r * In;
            const double* hr = h->v.data() + r * H;
            double* gxr = x->g.data() + r * In;
            double* ghr = h->g.data() + r * H;
            for (std::size_t m = 0; m < 4 * H; ++m) {
                const double d = dz[m];
                if (d == 0.0) continue;
                ker::axpy(d, Wx->v.data() + m * In, gxr, In);
                ker::axpy(d, Wh->v.data() + m * H, ghr, H);
                ker::axpy(d, xr, Wx->g.data() + m * In, In);
                ker::axpy(d, hr, Wh->g.data() + m * H, H);
                b->g[m] += d;
            }
        }
    });
    return {hn, cn};
}

TensorPtr Graph::reparameterize(const TensorPtr& mu, const TensorPtr& logvar,
                                const TensorPtr& eps) {
    require(same_shape(*mu, *logvar) && same_shape(*mu, *eps), "reparameterize", "shape mismatch");
    auto z = out(mu->shape, "reparameterize");
    auto sd = std::make_shared<std::vector<double>>(mu->numel());
    for (std::size_t i = 0; i < mu->numel(); ++i) {
        (*sd)[i] = std::exp(0.5 * logvar->v[i]);
        z->v[i] = mu->v[i] + (*sd)[i] * eps->v[i];
    }
    check_finite(*z, "reparameterize");
    record([mu, logvar, eps, z, sd] {
        for (std::size_t i = 0; i < z->v.size(); ++i) {
            mu->g[i] += z->g[i];
            logvar->g[i] += z->g[i] * eps->v[i] * 0.5 * (*sd)[i];
        }
    });
    return z;
}

TensorPtr Graph::add(const TensorPtr& a, const TensorPtr& b) {
    require(same_shape(*a, *b), "add", "shape mismatch");
    auto y = out(a->shape, "add");
    ker::vadd(a->v.data(), b->v.data(), y->v.data(), y->numel());
    record([a, b, y] {
        ker::axpy(1.0, y->g.data(), a->g.data(), y->g.size());
        ker::axpy(1.0, y->g.data(), b->g.data(), y->g.size());
    });
    return y;
}

TensorPtr Graph::sub(const TensorPtr& a, const TensorPtr& b) {
    require(same_shape(*a, *b), "sub", "shape mismatch");
    auto y = out(a->shape, "sub");
    for (std::size_t i = 0; i < y->numel(); ++i) y->v[i] = a->v[i] - b->v[i];
    record([a, b, y] {
        ker::axpy(1.0, y->g.data(), a->g.data(), y->g.size());
        ker::axpy(-1.0, y->g.data(), b->g.data(), y->g.size());
    });
    return y;
}

TensorPtr Graph::mul(const TensorPtr& a, const TensorPtr& b) {
    require(same_shape(*a, *b), "mul", "shape mismatch");
    auto y = out(a->shape, "mul");
    ker::vmul(a->v.data(), b->v.data(), y->v.data(), y->numel());
    check_finite(*y, "mul");
    record([a, b, y] {
        ker::vfma(y->g.data(), b->v.data(), a->g.data(), y->g.size());
        ker::vfma(y->g.data(), a->v.data(), b->g.data(), y->g.size());
    });
    return y;
}

TensorPtr Graph::min_(const TensorPtr& a, const TensorPtr& b) {
    require(same_shape(*a, *b), "min", "shape mismatch");
    auto y = out(a->shape, "min");
    for (std::size_t i = 0; i < y->numel(); ++i) y->v[i] = a->v[i] <= b->v[i] ? a->v[i] : b->v[i];
    record([a, b, y] {
        for (std::size_t i = 0; i < y->g.size(); ++i) {
            if (a->v[i] <= b->v[i])
                a->g[i] += y->g[i];
            else
                b->g[i] += y->g[i];
        }
    });
    return y;
}

TensorPtr Graph::scale_const(const TensorPtr& x, double c) {
    auto y = out(x->shape, "scale_const");
    for (std::size_t i = 0; i < y->numel(); ++i) y->v[i] = c * x->v[i];
    record([x, y, c] { ker::axpy(c, y->g.data(), x->g.data(), y->g.size()); });
    return y;
}

TensorPtr Graph::add_const(const TensorPtr& x, double c) {
    auto y = out(x->shape, "add_const");
    for (std::size_t i = 0; i < y->numel(); ++i) y->v[i] = x->v[i] + c;
    record([x, y] { ker::axpy(1.0, y->g.data(), x->g.data(), y->g.size()); });
    return y;
}

TensorPtr Graph::clamp_const(const TensorPtr& x, double lo, double hi) {
    auto y = out(x->shape, "clamp_const");
    for (std::size_t i = 0; i < y->numel(); ++i)
        y->v[i] = x->v[i] < lo ? lo : (x->v[i] > hi ? hi : x->v[i]);
    record([x, y, lo, hi] {
        for (std::size_t i = 0; i < y->g.size(); ++i)
            if (x->v[i] >= lo && x->v[i] <= hi) x->g[i] += y->g[i];
    });
    return y;
}

TensorPtr Graph::clamp_min_const(const TensorPtr& x, double lo) {
    auto y = out(x->shape, "clamp_min_const");
    for (std::size_t i = 0; i < y->numel(); ++i) y->v[i] = x->v[i] < lo ? lo : x->v[i];
    record([x, y, lo] {
        for (std::size_t i = 0; i < y->g.size(); ++i)
            if (x->v[i] >= lo) x->g[i] += y->g[i];
    });
    return y;
}

TensorPtr Graph::sum_all(const TensorPtr& x) {
    auto y = out({1}, "sum_all");
    double acc = 0.0;
    for (const double v : x->v) acc += v;
    y->v[0] = acc;
    check_finite(*y, "sum_all");
    record([x, y] {
        for (std::size_t i = 0; i < x->g.size(); ++i) x->g[i] += y->g[0];
    });
    return y;
}

TensorPtr Graph::mean_all(const TensorPtr& x) {
    require(x->numel() > 0, "mean_all", "empty tensor");
    auto y = out({1}, "mean_all");
    double acc = 0.0;
    for (const double v : x->v) acc += v;
    const double inv = 1.0 / static_cast<double>(x->numel());
    y->v[0] = acc * inv;
    check_finite(*y, "mean_all");
    record([x, y, inv] {
        const double g = y->g[0] * inv;
        for (std::size_t i = 0; i < x->g.size(); ++i) x->g[i] += g;
    });
    return y;
}

TensorPtr Graph::sum_rows(const TensorPtr& x) {
    require(x->shape.size() == 2, "sum_rows", "x must be [B,N]");
    const std::size_t B = x->dim(0), N = x->dim(1);
    auto y = out({B}, "sum_rows");
    for (std::size_t i = 0; i < B; ++i) {
        double acc = 0.0;
        for (std::size_t n = 0; n < N; ++n) acc += x->v[i * N + n];
        y->v[i] = acc;
    }
    check_finite(*y, "sum_rows");
    record([x, y, B, N] {
        for (std::size_t i = 0; i < B; ++i)
            for (std::size_t n = 0; n < N; ++n) x->g[i * N + n] += y->g[i];
    });
    return y;
}

TensorPtr Graph::rowwise_scale(const TensorPtr& x, const TensorPtr& s) {
    require(x->shape.size() == 2, "rowwise_scale", "x must be [B,N]");
    const std::size_t B = x->dim(0), N = x->dim(1);
    require(s->numel() == N, "rowwise_scale", "scale size mismatch");
    auto y = out({B, N}, "rowwise_scale");
    for (std::size_t i = 0; i < B; ++i)
        ker::vmul(x->v.data() + i * N, s->v.data(), y->v.data() + i * N, N);
    check_finite(*y, "rowwise_scale");
    record([x, s, y, B, N] {
        for (std::size_t i = 0; i < B; ++i) {
            ker::vfma(y->g.data() + i * N, s->v.data(), x->g.data() + i * N, N);
            ker::vfma(y->g.data() + i * N, x->v.data() + i * N, s->g.data(), N);
        }
    });
    return y;
}

TensorPtr Graph::add_scalar_node(const TensorPtr& x, const TensorPtr& s) {
    require(s->numel() == 1, "add_scalar_node", "s must be scalar");
    auto y = out(x->shape, "add_scalar_node");
    for (std::size_t i = 0; i < y->numel(); ++i) y->v[i] = x->v[i] + s->v[0];
    record([x, s, y] {
        double acc = 0.0;
        for (std::size_t i = 0; i < y->g.size(); ++i) {
            x->g[i] += y->g[i];
            acc += y->g[i];
        }
        s->g[0] += acc;
    });
    return y;
}

TensorPtr Graph::slice_cols(const TensorPtr& x, std::size_t from, std::size_t to) {
    require(x->shape.size() == 2, "slice_cols", "x must be [B,N]");
    const std::size_t B = x->dim(0), N = x->dim(1);
    require(from < to && to <= N, "slice_cols", "bad range");
    const std::size_t M = to - from;
    auto y = out({B, M}, "slice_cols");
    for (std::size_t i = 0; i < B; ++i)
        std::memcpy(y->v.data() + i * M, x->v.data() + i * N + from, M * sizeof(double));
    record([x, y, B, N, M, from] {
        for (std::size_t i = 0; i < B; ++i)
            ker::axpy(1.0, y->g.data() + i * M, x->g.data() + i * N + from, M);
    });
    return y;
}

TensorPtr Graph::reshape(const TensorPtr& x, std::vector<std::size_t> shape) {
    require(shape_numel(shape) == x->numel(), "reshape", "numel mismatch");
    auto y = out(std::move(shape), "reshape");
    y->v = x->v;
    record([x, y] { ker::axpy(1.0, y->g.data(), x->g.data(), y->g.size()); });
    return y;
}

TensorPtr Graph::concat_rows(const std::vector<TensorPtr>& xs) {
    require(!xs.empty(), "concat_rows", "empty input list");
    const std::size_t N = xs.front()->shape.size() == 2 ? xs.front()->dim(1) : 0;
    require(N > 0, "concat_rows", "inputs must be [B,N]");
    std::size_t T = 0;
    for (const auto& x : xs) {
        require(x->shape.size() == 2 && x->dim(1) == N, "concat_rows", "column mismatch");
        T += x->dim(0);
    }
    auto y = out({T, N}, "concat_rows");
    std::size_t row = 0;
    for (const auto& x : xs) {
        std::memcpy(y->v.data() + row * N, x->v.data(), x->numel() * sizeof(double));
        row += x->dim(0);
    }
    record([xs, y, N] {
        std::size_t r = 0;
        for (const auto& x : xs) {
            ker::axpy(1.0, y->g.data() + r * N, x->g.data(), x->numel());
            r += x->dim(0);
        }
    });
    return y;
}

TensorPtr Graph::gather_rows(const TensorPtr& x, const std::vector<std::size_t>& rows) {
    require(x->shape.size() == 2, "gather_rows", "x must be [T,N]");
    require(!rows.empty(), "gather_rows", "empty row list");
    const std::size_t T = x->dim(0), N = x->dim(1);
    for (const std::size_t r : rows) require(r < T, "gather_rows", "row index out of range");
    auto y = out({rows.size(), N}, "gather_rows");
    for (std::size_t k = 0; k < rows.size(); ++k)
        std::memcpy(y->v.data() + k * N, x->v.data() + rows[k] * N, N * sizeof(double));
    record([x, y, rows, N] {
        for (std::size_t k = 0; k < rows.size(); ++k)
            ker::axpy(1.0, y->g.data() + k * N, x->g.data() + rows[k] * N, N);
    });
    return y;
}

TensorPtr Graph::mse(const TensorPtr& a, const TensorPtr& b) {
    require(same_shape(*a, *b), "mse", "shape mismatch");
    require(a->numel() > 0, "mse", "empty tensor");
    auto y = out({1}, "mse");
    const std::size_t n = a->numel();
    y->v[0] = ker::sum_sq_diff(a->v.data(), b->v.data(), n) / static_cast<double>(n);
    check_finite(*y, "mse");
    record([a, b, y, n] {
        const double g = y->g[0] * 2.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = a->v[i] - b->v[i];
            a->g[i] += g * d;
            b->g[i] -= g * d;
        }
    });
    return y;
}

TensorPtr Graph::kl_unit_gaussian(const TensorPtr& mu, const TensorPtr& logvar) {
    require(same_shape(*mu, *logvar), "kl_unit_gaussian", "shape mismatch");
    require(mu->shape.size() == 2, "kl_unit_gaussian", "inputs must be [B,N]");
    const std::size_t B = mu->dim(0), N = mu->dim(1);
    auto y = out({1}, "kl_unit_gaussian");
    double acc = 0.0;
    for (std::size_t i = 0; i < B * N; ++i) {
        const double m = mu->v[i], lv = logvar->v[i];
        acc += 0.5 * (m * m + std::exp(lv) - 1.0 - lv);
    }
    y->v[0] = acc / static_cast<double>(B);
    check_finite(*y, "kl_unit_gaussian");
    record([mu, logvar, y, B] {
        const double g = y->g[0] / static_cast<double>(B);
        for (std::size_t i = 0; i < mu->v.size(); ++i) {
            mu->g[i] += g * mu->v[i];
            logvar->g[i] += g * 0.5 * (std::exp(logvar->v[i]) - 1.0);
        }
    });
    return y;
}

void Graph::backward(const TensorPtr& loss) {
    require(loss->numel() == 1, "backward", "loss must be scalar");
    loss->g[0] += 1.0;
    for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) (*it)();
}

} // namespace memnav::neural
