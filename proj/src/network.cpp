#include "vpinn/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "vpinn/io.hpp"
#include "vpinn/parallel.hpp"

namespace vpinn {

namespace {
constexpr int kPointBlock = 192;  // points per parallel work unit (fixed partition)

void tanh_row(double* x, int n) {
    for (int p = 0; p < n; ++p) x[p] = std::tanh(x[p]);
}
}  // namespace

MLPParams::MLPParams(std::vector<int> widths) : widths_(std::move(widths)) {
    if (widths_.size() < 2) {
        throw std::invalid_argument("MLPParams: need at least input and output widths");
    }
    for (int w : widths_) {
        if (w < 1) throw std::invalid_argument("MLPParams: widths must be positive");
    }
    int offset = 0;
    for (int l = 0; l + 1 < static_cast<int>(widths_.size()); ++l) {
        weight_offset_.push_back(offset);
        offset += widths_[l + 1] * widths_[l];
        bias_offset_.push_back(offset);
        offset += widths_[l + 1];
    }
    data_.assign(offset, 0.0);
}

std::span<double> MLPParams::weight(int layer) {
    return {data_.data() + weight_offset_[layer],
            static_cast<size_t>(widths_[layer + 1]) * widths_[layer]};
}
std::span<const double> MLPParams::weight(int layer) const {
    return {data_.data() + weight_offset_[layer],
            static_cast<size_t>(widths_[layer + 1]) * widths_[layer]};
}
std::span<double> MLPParams::bias(int layer) {
    return {data_.data() + bias_offset_[layer], static_cast<size_t>(widths_[layer + 1])};
}
std::span<const double> MLPParams::bias(int layer) const {
    return {data_.data() + bias_offset_[layer], static_cast<size_t>(widths_[layer + 1])};
}

MLPParams init_params(const std::vector<int>& widths, std::uint64_t seed) {
    if (widths.empty()) throw std::invalid_argument("init_params: empty widths");
    if (widths.front() != 2 || widths.back() != 1) {
        throw std::invalid_argument("init_params: widths must start with 2 and end with 1");
    }
    MLPParams params(widths);
    std::mt19937_64 rng(seed);
    auto unit = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int l = 0; l < params.layer_count(); ++l) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(widths[l]));
        for (double& w : params.weight(l)) {
            w = (2.0 * unit() - 1.0) * scale;
        }
        // biases stay zero
    }
    return params;
}

void save_params(const MLPParams& params, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "vpinn-mlp 1\n";
    out << params.widths().size();
    for (int w : params.widths()) out << ' ' << w;
    out << '\n' << params.parameter_count() << '\n';
    for (double v : params.flat()) out << format_shortest(v) << '\n';
}

MLPParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "vpinn-mlp" || version != 1) {
        throw std::runtime_error("unrecognized checkpoint header in " + path);
    }
    size_t nw = 0;
    in >> nw;
    std::vector<int> widths(nw);
    for (auto& w : widths) in >> w;
    int count = 0;
    in >> count;
    MLPParams params(widths);
    if (count != params.parameter_count()) {
        throw std::runtime_error("checkpoint parameter count mismatch in " + path);
    }
    for (double& v : params.flat()) {
        std::string token;
        in >> token;
        v = parse_double(token);
    }
    if (!in) throw std::runtime_error("truncated checkpoint " + path);
    return params;
}

// ---------------------------------------------------------------------------
// batched forward / backward kernels
//
// Row-major activations: row i of a buffer holds unit i over a contiguous
// range of points. The same kernels serve plain evaluation and the taped
// pass of loss_gradient, so both produce bit-identical values.
// ---------------------------------------------------------------------------

namespace {

// Z[i] = b[i] + sum_j W[i,j] A[j]; the j-unrolling fixes the summation
// pattern once for every caller
void affine_forward(const double* w, const double* b, int nout, int nin, const double* a,
                    size_t lda, double* z, size_t ldz, int np) {
    for (int i = 0; i < nout; ++i) {
        double* zi = z + i * ldz;
        const double bi = b ? b[i] : 0.0;
        for (int p = 0; p < np; ++p) zi[p] = bi;
        const double* wi = w + static_cast<size_t>(i) * nin;
        int j = 0;
        for (; j + 4 <= nin; j += 4) {
            const double w0 = wi[j], w1 = wi[j + 1], w2 = wi[j + 2], w3 = wi[j + 3];
            const double* a0 = a + j * lda;
            const double* a1 = a + (j + 1) * lda;
            const double* a2 = a + (j + 2) * lda;
            const double* a3 = a + (j + 3) * lda;
            for (int p = 0; p < np; ++p) {
                zi[p] += (w0 * a0[p] + w1 * a1[p]) + (w2 * a2[p] + w3 * a3[p]);
            }
        }
        for (; j < nin; ++j) {
            const double wij = wi[j];
            const double* aj = a + j * lda;
            for (int p = 0; p < np; ++p) zi[p] += wij * aj[p];
        }
    }
}

// Abar = W^T Zbar (overwrites)
void affine_backward_input(const double* w, int nout, int nin, const double* zbar, size_t ldz,
                           double* abar, size_t lda, int np) {
    for (int j = 0; j < nin; ++j) {
        double* aj = abar + j * lda;
        for (int p = 0; p < np; ++p) aj[p] = 0.0;
    }
    int i = 0;
    for (; i + 4 <= nout; i += 4) {
        const double* z0 = zbar + i * ldz;
        const double* z1 = zbar + (i + 1) * ldz;
        const double* z2 = zbar + (i + 2) * ldz;
        const double* z3 = zbar + (i + 3) * ldz;
        for (int j = 0; j < nin; ++j) {
            const double w0 = w[static_cast<size_t>(i) * nin + j];
            const double w1 = w[static_cast<size_t>(i + 1) * nin + j];
            const double w2 = w[static_cast<size_t>(i + 2) * nin + j];
            const double w3 = w[static_cast<size_t>(i + 3) * nin + j];
            double* aj = abar + j * lda;
            for (int p = 0; p < np; ++p) {
                aj[p] += (w0 * z0[p] + w1 * z1[p]) + (w2 * z2[p] + w3 * z3[p]);
            }
        }
    }
    for (; i < nout; ++i) {
        const double* zi = zbar + i * ldz;
        const double* wi = w + static_cast<size_t>(i) * nin;
        for (int j = 0; j < nin; ++j) {
            const double wij = wi[j];
            double* aj = abar + j * lda;
            for (int p = 0; p < np; ++p) aj[p] += wij * zi[p];
        }
    }
}

// fixed 16-lane dot product: four independent vector accumulator chains,
// deterministic summation order regardless of caller
inline double dot_rows(const double* x, const double* y, int np) {
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0, s6 = 0, s7 = 0;
    double s8 = 0, s9 = 0, sa = 0, sb = 0, sc = 0, sd = 0, se = 0, sf = 0;
    int p = 0;
    for (; p + 16 <= np; p += 16) {
        s0 += x[p] * y[p];
        s1 += x[p + 1] * y[p + 1];
        s2 += x[p + 2] * y[p + 2];
        s3 += x[p + 3] * y[p + 3];
        s4 += x[p + 4] * y[p + 4];
        s5 += x[p + 5] * y[p + 5];
        s6 += x[p + 6] * y[p + 6];
        s7 += x[p + 7] * y[p + 7];
        s8 += x[p + 8] * y[p + 8];
        s9 += x[p + 9] * y[p + 9];
        sa += x[p + 10] * y[p + 10];
        sb += x[p + 11] * y[p + 11];
        sc += x[p + 12] * y[p + 12];
        sd += x[p + 13] * y[p + 13];
        se += x[p + 14] * y[p + 14];
        sf += x[p + 15] * y[p + 15];
    }
    double s = (((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7))) +
               (((s8 + s9) + (sa + sb)) + ((sc + sd) + (se + sf)));
    for (; p < np; ++p) s += x[p] * y[p];
    return s;
}

inline double sum_row(const double* x, int np) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    int p = 0;
    for (; p + 4 <= np; p += 4) {
        s0 += x[p];
        s1 += x[p + 1];
        s2 += x[p + 2];
        s3 += x[p + 3];
    }
    double s = (s0 + s1) + (s2 + s3);
    for (; p < np; ++p) s += x[p];
    return s;
}

// Wbar[i,j] += sum_p Zbar[i,p] A[j,p]
void accumulate_weight_grad(const double* zbar, size_t ldz, int nout, const double* a, size_t lda,
                            int nin, int np, double* wbar) {
    for (int i = 0; i < nout; ++i) {
        const double* zi = zbar + i * ldz;
        double* wi = wbar + static_cast<size_t>(i) * nin;
        for (int j = 0; j < nin; ++j) {
            wi[j] += dot_rows(zi, a + j * lda, np);
        }
    }
}

void accumulate_bias_grad(const double* zbar, size_t ldz, int nout, int np, double* bbar) {
    for (int i = 0; i < nout; ++i) {
        bbar[i] += sum_row(zbar + i * ldz, np);
    }
}

// tape of one forward block: per hidden layer A = tanh(Z) and the raw
// spatial-derivative channels Zpx/Zpy (before the sech^2 scaling)
struct TapeView {
    // row-major buffers with shared stride; row i = unit i
    std::vector<double*> a;    // per hidden layer
    std::vector<double*> zpx;
    std::vector<double*> zpy;
    size_t stride = 0;
};

struct Scratch {
    std::vector<double> buf_a[2], buf_gx[2], buf_gy[2];
    std::vector<double> n, nx, ny;
    std::vector<double> bar_a, bar_gx, bar_gy, bar_a2, bar_gx2, bar_gy2;
};

Scratch& scratch() {
    thread_local Scratch s;
    return s;
}

// forward over one block of points; writes the network output and spatial
// gradient, and fills the tape when given one
void forward_block(const MLPParams& params, const Vec2* pts, int np, double* out_n,
                   double* out_nx, double* out_ny, const TapeView* tape) {
    const auto& widths = params.widths();
    const int layers = params.layer_count();
    Scratch& s = scratch();
    const int maxw = *std::max_element(widths.begin(), widths.end());
    for (auto* b : {&s.buf_a[0], &s.buf_a[1], &s.buf_gx[0], &s.buf_gx[1], &s.buf_gy[0],
                    &s.buf_gy[1]}) {
        b->resize(static_cast<size_t>(maxw) * np);
    }

    // input rows
    double* a_prev = s.buf_a[0].data();
    double* gx_prev = s.buf_gx[0].data();
    double* gy_prev = s.buf_gy[0].data();
    for (int p = 0; p < np; ++p) {
        a_prev[p] = pts[p].x;
        a_prev[np + p] = pts[p].y;
        gx_prev[p] = 1.0;
        gx_prev[np + p] = 0.0;
        gy_prev[p] = 0.0;
        gy_prev[np + p] = 1.0;
    }

    for (int l = 0; l < layers; ++l) {
        const int nin = widths[l];
        const int nout = widths[l + 1];
        const bool last = (l == layers - 1);
        double* a_next = last ? out_n : s.buf_a[(l + 1) & 1].data();
        double* gx_next = last ? out_nx : s.buf_gx[(l + 1) & 1].data();
        double* gy_next = last ? out_ny : s.buf_gy[(l + 1) & 1].data();
        const double* w = params.weight(l).data();
        const double* b = params.bias(l).data();

        affine_forward(w, b, nout, nin, a_prev, np, a_next, np, np);
        if (l == 0) {
            // input spatial gradients are constant unit vectors
            for (int i = 0; i < nout; ++i) {
                const double wx = w[i * 2 + 0];
                const double wy = w[i * 2 + 1];
                double* gx = gx_next + static_cast<size_t>(i) * np;
                double* gy = gy_next + static_cast<size_t>(i) * np;
                for (int p = 0; p < np; ++p) gx[p] = wx;
                for (int p = 0; p < np; ++p) gy[p] = wy;
            }
        } else {
            affine_forward(w, nullptr, nout, nin, gx_prev, np, gx_next, np, np);
            affine_forward(w, nullptr, nout, nin, gy_prev, np, gy_next, np, np);
        }

        if (!last) {
            if (tape) {
                for (int i = 0; i < nout; ++i) {
                    double* ta = tape->zpx[l] + static_cast<size_t>(i) * tape->stride;
                    double* tb = tape->zpy[l] + static_cast<size_t>(i) * tape->stride;
                    const double* gx = gx_next + static_cast<size_t>(i) * np;
                    const double* gy = gy_next + static_cast<size_t>(i) * np;
                    for (int p = 0; p < np; ++p) ta[p] = gx[p];
                    for (int p = 0; p < np; ++p) tb[p] = gy[p];
                }
            }
            for (int i = 0; i < nout; ++i) {
                double* ai = a_next + static_cast<size_t>(i) * np;
                double* gx = gx_next + static_cast<size_t>(i) * np;
                double* gy = gy_next + static_cast<size_t>(i) * np;
                tanh_row(ai, np);
                for (int p = 0; p < np; ++p) {
                    const double d = 1.0 - ai[p] * ai[p];
                    gx[p] *= d;
                    gy[p] *= d;
                }
            }
            if (tape) {
                for (int i = 0; i < nout; ++i) {
                    double* ta = tape->a[l] + static_cast<size_t>(i) * tape->stride;
                    const double* ai = a_next + static_cast<size_t>(i) * np;
                    for (int p = 0; p < np; ++p) ta[p] = ai[p];
                }
            }
        }
        a_prev = a_next;
        gx_prev = gx_next;
        gy_prev = gy_next;
    }
}

}  // namespace

TrialField::TrialField(MLPParams params, std::function<double(Vec2)> multiplier,
                       std::function<Vec2(Vec2)> multiplier_gradient,
                       std::function<double(Vec2)> lift, std::function<Vec2(Vec2)> lift_gradient)
    : params_(std::move(params)),
      phi_(std::move(multiplier)),
      phi_grad_(std::move(multiplier_gradient)),
      lift_(std::move(lift)),
      lift_grad_(std::move(lift_gradient)) {}

TrialField TrialField::for_problem(MLPParams params, const ProblemSpec& spec) {
    auto phi = [](Vec2 p) { return p.x * (1.0 - p.x) * p.y * (1.0 - p.y); };
    auto phi_grad = [](Vec2 p) {
        return Vec2{(1.0 - 2.0 * p.x) * p.y * (1.0 - p.y), p.x * (1.0 - p.x) * (1.0 - 2.0 * p.y)};
    };
    if (!spec.lift || !spec.lift_gradient) {
        throw std::invalid_argument("TrialField::for_problem: problem has no Dirichlet lift");
    }
    return TrialField(std::move(params), phi, phi_grad, spec.lift, spec.lift_gradient);
}

void TrialField::eval_batch(std::span<const Vec2> points, std::span<double> values,
                            std::span<Vec2> gradients) const {
    const int total = static_cast<int>(points.size());
    const int nblocks = (total + kPointBlock - 1) / kPointBlock;
    parallel_blocks(nblocks, [&](int blk) {
        const int p0 = blk * kPointBlock;
        const int np = std::min(kPointBlock, total - p0);
        Scratch& s = scratch();
        s.n.resize(np);
        s.nx.resize(np);
        s.ny.resize(np);
        forward_block(params_, points.data() + p0, np, s.n.data(), s.nx.data(), s.ny.data(),
                      nullptr);
        for (int p = 0; p < np; ++p) {
            const Vec2 x = points[p0 + p];
            const double phi = phi_(x);
            const Vec2 dphi = phi_grad_(x);
            values[p0 + p] = phi * s.n[p] + lift_(x);
            const Vec2 dlift = lift_grad_(x);
            gradients[p0 + p] = Vec2{dphi.x * s.n[p] + phi * s.nx[p] + dlift.x,
                                     dphi.y * s.n[p] + phi * s.ny[p] + dlift.y};
        }
    });
}

std::pair<double, Vec2> TrialField::value_and_gradient(Vec2 p) const {
    double value = 0.0;
    Vec2 gradient;
    eval_batch(std::span<const Vec2>(&p, 1), std::span<double>(&value, 1),
               std::span<Vec2>(&gradient, 1));
    return {value, gradient};
}

// ---------------------------------------------------------------------------
// loss gradient
// ---------------------------------------------------------------------------

LossGradientResult loss_gradient(const TrialField& field, const AssemblyWorkspace& ws) {
    const MLPParams& params = field.params();
    const auto& widths = params.widths();
    const int layers = params.layer_count();
    const size_t total = ws.points.size();
    const int nblocks = static_cast<int>((total + kPointBlock - 1) / kPointBlock);

    // global tape: raw derivative channels and activations for every point
    std::vector<std::vector<double>> tape_a(layers - 1), tape_zpx(layers - 1),
        tape_zpy(layers - 1);
    for (int l = 0; l < layers - 1; ++l) {
        tape_a[l].resize(static_cast<size_t>(widths[l + 1]) * total);
        tape_zpx[l].resize(static_cast<size_t>(widths[l + 1]) * total);
        tape_zpy[l].resize(static_cast<size_t>(widths[l + 1]) * total);
    }
    std::vector<double> net(total), net_x(total), net_y(total);
    std::vector<double> values(total);
    std::vector<Vec2> gradients(total);

    parallel_blocks(nblocks, [&](int blk) {
        const size_t p0 = static_cast<size_t>(blk) * kPointBlock;
        const int np = static_cast<int>(std::min<size_t>(kPointBlock, total - p0));
        TapeView view;
        view.stride = total;
        for (int l = 0; l < layers - 1; ++l) {
            view.a.push_back(tape_a[l].data() + p0);
            view.zpx.push_back(tape_zpx[l].data() + p0);
            view.zpy.push_back(tape_zpy[l].data() + p0);
        }
        forward_block(params, ws.points.data() + p0, np, net.data() + p0, net_x.data() + p0,
                      net_y.data() + p0, &view);
        for (int p = 0; p < np; ++p) {
            const size_t i = p0 + p;
            const Vec2 x = ws.points[i];
            const double phi = field.multiplier(x);
            const Vec2 dphi = field.multiplier_gradient(x);
            values[i] = phi * net[i] + field.lift(x);
            const Vec2 dlift = field.lift_gradient(x);
            gradients[i] = Vec2{dphi.x * net[i] + phi * net_x[i] + dlift.x,
                                dphi.y * net[i] + phi * net_y[i] + dlift.y};
        }
    });

    LossGradientResult result;
    result.residuals = accumulate_residuals(ws, values, gradients);
    result.loss = result.residuals.loss();

    // seeds: d(R^2)/d(N) and d(R^2)/d(grad N) at every quadrature point
    std::vector<double> alpha(total, 0.0);
    std::vector<Vec2> gamma(total);
    const int nq = ws.nodes_per_element;
    const int nt = ws.mesh->num_triangles();
    for (int t = 0; t < nt; ++t) {
        const size_t base = static_cast<size_t>(t) * nq;
        for (int q = 0; q < nq; ++q) {
            const size_t i = base + q;
            const double w = ws.weights[i];
            double ubar = 0.0;
            Vec2 gbar{0.0, 0.0};
            for (int k = 0; k < 3; ++k) {
                const int idx = ws.residual_index[t][k];
                if (idx < 0) continue;
                const double r2 = 2.0 * result.residuals.values[idx];
                const double phi_v = ws.hat_values[q][k];
                const Vec2 gphi = ws.hat_gradients[t][k];
                ubar -= r2 * w * ws.sigma_values[i] * phi_v;
                gbar = gbar - r2 * w * (ws.mu_values[i] * gphi + phi_v * ws.beta_values[i]);
            }
            const Vec2 x = ws.points[i];
            const double phi = field.multiplier(x);
            const Vec2 dphi = field.multiplier_gradient(x);
            alpha[i] = ubar * phi + dot(gbar, dphi);
            gamma[i] = phi * gbar;
        }
    }

    // reverse pass, one gradient buffer per block, reduced in block order
    const int nparams = params.parameter_count();
    std::vector<std::vector<double>> block_grad(nblocks);
    parallel_blocks(nblocks, [&](int blk) {
        const size_t p0 = static_cast<size_t>(blk) * kPointBlock;
        const int np = static_cast<int>(std::min<size_t>(kPointBlock, total - p0));
        block_grad[blk].assign(nparams, 0.0);
        MLPParams grad_view(params.widths());
        grad_view.flat() = std::move(block_grad[blk]);

        Scratch& s = scratch();
        const int maxw = *std::max_element(widths.begin(), widths.end());
        for (auto* b : {&s.bar_a, &s.bar_gx, &s.bar_gy, &s.bar_a2, &s.bar_gx2, &s.bar_gy2}) {
            b->resize(static_cast<size_t>(maxw) * np);
        }
        // current adjoint rows (z-bar, Z'x-bar, Z'y-bar of the layer being processed)
        double* zbar = s.bar_a.data();
        double* pxbar = s.bar_gx.data();
        double* pybar = s.bar_gy.data();
        for (int p = 0; p < np; ++p) {
            zbar[p] = alpha[p0 + p];
            pxbar[p] = gamma[p0 + p].x;
            pybar[p] = gamma[p0 + p].y;
        }

        // recomputed input rows for the weight gradients of layer 0
        std::vector<double> input_rows(static_cast<size_t>(2) * np);
        for (int p = 0; p < np; ++p) {
            input_rows[p] = ws.points[p0 + p].x;
            input_rows[np + p] = ws.points[p0 + p].y;
        }
        std::vector<double> g_rows;  // G = sech^2 . Z' of the previous hidden layer

        for (int l = layers - 1; l >= 0; --l) {
            const int nin = widths[l];
            const int nout = widths[l + 1];
            double* wbar = grad_view.weight(l).data();
            double* bbar = grad_view.bias(l).data();
            accumulate_bias_grad(zbar, np, nout, np, bbar);

            if (l == 0) {
                accumulate_weight_grad(zbar, np, nout, input_rows.data(), np, 2, np, wbar);
                // spatial channels differentiate the constant input gradients
                for (int i = 0; i < nout; ++i) {
                    double sx = 0.0, sy = 0.0;
                    const double* px = pxbar + static_cast<size_t>(i) * np;
                    const double* py = pybar + static_cast<size_t>(i) * np;
                    for (int p = 0; p < np; ++p) sx += px[p];
                    for (int p = 0; p < np; ++p) sy += py[p];
                    wbar[i * 2 + 0] += sx;
                    wbar[i * 2 + 1] += sy;
                }
                break;
            }

            // weight gradients need A_{l-1} and G_{l-1} = sech^2 . Z'_{l-1}
            const double* a_prev = tape_a[l - 1].data() + p0;
            const double* zpx_prev = tape_zpx[l - 1].data() + p0;
            const double* zpy_prev = tape_zpy[l - 1].data() + p0;
            g_rows.resize(static_cast<size_t>(2) * nin * np);
            double* gx_prev = g_rows.data();
            double* gy_prev = g_rows.data() + static_cast<size_t>(nin) * np;
            for (int j = 0; j < nin; ++j) {
                const double* aj = a_prev + static_cast<size_t>(j) * total;
                const double* zx = zpx_prev + static_cast<size_t>(j) * total;
                const double* zy = zpy_prev + static_cast<size_t>(j) * total;
                double* gx = gx_prev + static_cast<size_t>(j) * np;
                double* gy = gy_prev + static_cast<size_t>(j) * np;
                for (int p = 0; p < np; ++p) {
                    const double d = 1.0 - aj[p] * aj[p];
                    gx[p] = d * zx[p];
                    gy[p] = d * zy[p];
                }
            }
            accumulate_weight_grad(zbar, np, nout, a_prev, total, nin, np, wbar);
            accumulate_weight_grad(pxbar, np, nout, gx_prev, np, nin, np, wbar);
            accumulate_weight_grad(pybar, np, nout, gy_prev, np, nin, np, wbar);

            // propagate adjoints to layer l-1 and pull them through tanh
            const double* w = params.weight(l).data();
            double* abar_prev = s.bar_a2.data();
            double* gxbar_prev = s.bar_gx2.data();
            double* gybar_prev = s.bar_gy2.data();
            affine_backward_input(w, nout, nin, zbar, np, abar_prev, np, np);
            affine_backward_input(w, nout, nin, pxbar, np, gxbar_prev, np, np);
            affine_backward_input(w, nout, nin, pybar, np, gybar_prev, np, np);
            for (int j = 0; j < nin; ++j) {
                const double* aj = a_prev + static_cast<size_t>(j) * total;
                const double* zx = zpx_prev + static_cast<size_t>(j) * total;
                const double* zy = zpy_prev + static_cast<size_t>(j) * total;
                double* ab = abar_prev + static_cast<size_t>(j) * np;
                double* gxb = gxbar_prev + static_cast<size_t>(j) * np;
                double* gyb = gybar_prev + static_cast<size_t>(j) * np;
                for (int p = 0; p < np; ++p) {
                    const double t = aj[p];
                    const double d = 1.0 - t * t;
                    const double gdot = gxb[p] * zx[p] + gyb[p] * zy[p];
                    ab[p] = d * (ab[p] - 2.0 * t * gdot);
                    gxb[p] = d * gxb[p];
                    gyb[p] = d * gyb[p];
                }
            }
            std::swap(s.bar_a, s.bar_a2);
            std::swap(s.bar_gx, s.bar_gx2);
            std::swap(s.bar_gy, s.bar_gy2);
            zbar = s.bar_a.data();
            pxbar = s.bar_gx.data();
            pybar = s.bar_gy.data();
        }
        block_grad[blk] = std::move(grad_view.flat());
    });

    result.gradient.assign(nparams, 0.0);
    for (int blk = 0; blk < nblocks; ++blk) {
        for (int i = 0; i < nparams; ++i) result.gradient[i] += block_grad[blk][i];
    }
    return result;
}

LossGradientResult loss_gradient(const TrialField& field, const Mesh& mesh,
                                 const ProblemSpec& data, const QuadRule& rule) {
    AssemblyWorkspace ws(mesh, data, rule);
    return loss_gradient(field, ws);
}

}  // namespace vpinn
