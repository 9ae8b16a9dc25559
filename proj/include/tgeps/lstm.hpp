#pragma once

// Single-direction LSTM layer with an explicit forward tape and manual
// backpropagation through time.
//
//   z_t = Wx x_t + Wh h_{t-1} + b          (4h rows: input, forget, output, cell)
//   c_t = f * c_{t-1} + i * g,   h_t = o * tanh(c_t)

#include <algorithm>
#include <cmath>
#include <vector>

#include "tgeps/common.hpp"

namespace tgeps {

struct LstmParams {
    Matrix<double> wx;      // 4h x input
    Matrix<double> wh;      // 4h x hidden
    std::vector<double> b;  // 4h

    LstmParams() = default;
    LstmParams(std::size_t input, std::size_t hidden)
        : wx(4 * hidden, input), wh(4 * hidden, hidden), b(4 * hidden, 0.0) {}

    std::size_t input() const noexcept { return wx.cols(); }
    std::size_t hidden() const noexcept { return wh.cols(); }

    void zero() {
        wx.fill(0.0);
        wh.fill(0.0);
        std::fill(b.begin(), b.end(), 0.0);
    }

    friend bool operator==(const LstmParams&, const LstmParams&) = default;
};

/// Forward activations of one pass, indexed by processing step.
struct LstmTape {
    std::size_t steps = 0;
    bool reverse = false;
    Matrix<double> x;      // steps x input (step order)
    Matrix<double> gates;  // steps x 4h, post-activation (i, f, o, g)
    Matrix<double> c;      // steps x h
    Matrix<double> tanh_c; // steps x h
    Matrix<double> h;      // steps x h

    /// Sequence position handled at a processing step.
    std::size_t position(std::size_t step) const noexcept { return reverse ? steps - 1 - step : step; }

    /// Hidden state emitted at a sequence position.
    std::span<const double> output(std::size_t pos) const noexcept {
        return h.row(reverse ? steps - 1 - pos : pos);
    }
};

/// Runs the layer over `inputs` (one row per position), right-to-left when
/// `reverse` is set. Initial h and c are zero.
inline void lstm_forward(const LstmParams& p, const Matrix<double>& inputs, bool reverse, LstmTape& tape) {
    const std::size_t T = inputs.rows();
    const std::size_t H = p.hidden();
    const std::size_t I = p.input();
    tape.steps = T;
    tape.reverse = reverse;
    tape.x = Matrix<double>(T, I);
    tape.gates = Matrix<double>(T, 4 * H);
    tape.c = Matrix<double>(T, H);
    tape.tanh_c = Matrix<double>(T, H);
    tape.h = Matrix<double>(T, H);

    std::vector<double> z(4 * H);
    for (std::size_t s = 0; s < T; ++s) {
        auto x = tape.x.row(s);
        auto src = inputs.row(tape.position(s));
        std::copy(src.begin(), src.end(), x.begin());

        for (std::size_t r = 0; r < 4 * H; ++r) {
            double acc = p.b[r];
            auto wxr = p.wx.row(r);
            for (std::size_t k = 0; k < I; ++k) acc += wxr[k] * x[k];
            if (s > 0) {
                auto whr = p.wh.row(r);
                auto hp = tape.h.row(s - 1);
                for (std::size_t k = 0; k < H; ++k) acc += whr[k] * hp[k];
            }
            z[r] = acc;
        }
        auto g = tape.gates.row(s);
        for (std::size_t k = 0; k < 3 * H; ++k) g[k] = sigmoid(z[k]);
        for (std::size_t k = 3 * H; k < 4 * H; ++k) g[k] = std::tanh(z[k]);

        auto c = tape.c.row(s);
        auto tc = tape.tanh_c.row(s);
        auto h = tape.h.row(s);
        for (std::size_t k = 0; k < H; ++k) {
            const double cp = s > 0 ? tape.c(s - 1, k) : 0.0;
            c[k] = g[H + k] * cp + g[k] * g[3 * H + k];
            tc[k] = std::tanh(c[k]);
            h[k] = g[2 * H + k] * tc[k];
        }
    }
}

/// Backpropagates `d_out` (gradient w.r.t. the output at each sequence
/// position, rows = positions) through the tape. Parameter gradients are
/// accumulated into `grad`; input gradients are written to `d_in` (rows =
/// positions).
inline void lstm_backward(const LstmParams& p, const LstmTape& tape, const Matrix<double>& d_out, LstmParams& grad,
                          Matrix<double>& d_in) {
    const std::size_t T = tape.steps;
    const std::size_t H = p.hidden();
    const std::size_t I = p.input();
    d_in = Matrix<double>(T, I);

    std::vector<double> dh_next(H, 0.0), dc_next(H, 0.0), dz(4 * H);
    for (std::size_t s = T; s-- > 0;) {
        const std::size_t pos = tape.position(s);
        auto g = tape.gates.row(s);
        auto tc = tape.tanh_c.row(s);
        auto dout = d_out.row(pos);
        for (std::size_t k = 0; k < H; ++k) {
            const double dh = dout[k] + dh_next[k];
            const double i = g[k], f = g[H + k], o = g[2 * H + k], gg = g[3 * H + k];
            const double dc = dh * o * (1.0 - tc[k] * tc[k]) + dc_next[k];
            const double cp = s > 0 ? tape.c(s - 1, k) : 0.0;
            dz[k] = dc * gg * i * (1.0 - i);
            dz[H + k] = dc * cp * f * (1.0 - f);
            dz[2 * H + k] = dh * tc[k] * o * (1.0 - o);
            dz[3 * H + k] = dc * i * (1.0 - gg * gg);
            dc_next[k] = dc * f;
        }

        auto x = tape.x.row(s);
        auto dx = d_in.row(pos);
        std::fill(dh_next.begin(), dh_next.end(), 0.0);
        for (std::size_t r = 0; r < 4 * H; ++r) {
            const double d = dz[r];
            if (d == 0.0) continue;
            grad.b[r] += d;
            auto gwx = grad.wx.row(r);
            auto wxr = p.wx.row(r);
            for (std::size_t k = 0; k < I; ++k) {
                gwx[k] += d * x[k];
                dx[k] += d * wxr[k];
            }
            if (s > 0) {
                auto gwh = grad.wh.row(r);
                auto whr = p.wh.row(r);
                auto hp = tape.h.row(s - 1);
                for (std::size_t k = 0; k < H; ++k) {
                    gwh[k] += d * hp[k];
                    dh_next[k] += d * whr[k];
                }
            }
        }
    }
}

} // namespace tgeps
