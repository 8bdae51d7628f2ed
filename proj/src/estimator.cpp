#include "vpinn/estimator.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "vpinn/io.hpp"

namespace vpinn {

namespace {

// Per-element evaluation slots, in barycentric coordinates:
//   [ lattice deg 3 | lattice deg 2 | order-7 nodes | precision-3 nodes ]
struct SlotLayout {
    std::vector<std::array<double, 3>> bary;
    int lat3_begin = 0, lat3_count = 0;
    int lat2_begin = 0, lat2_count = 0;
    int o7_begin = 0, o7_count = 0;
    int q3_begin = 0, q3_count = 0;
    std::vector<double> o7_ref_weights;
    std::vector<double> q3_ref_weights;

    static const SlotLayout& get() {
        static const SlotLayout layout = [] {
            SlotLayout l;
            const auto& lat3 = principal_lattice(3);
            const auto& lat2 = principal_lattice(2);
            const QuadRule& o7 = reference_rule(7);
            const QuadRule& q3 = reference_rule(3);
            l.lat3_begin = 0;
            l.lat3_count = static_cast<int>(lat3.size());
            l.bary.insert(l.bary.end(), lat3.begin(), lat3.end());
            l.lat2_begin = static_cast<int>(l.bary.size());
            l.lat2_count = static_cast<int>(lat2.size());
            l.bary.insert(l.bary.end(), lat2.begin(), lat2.end());
            l.o7_begin = static_cast<int>(l.bary.size());
            l.o7_count = static_cast<int>(o7.nodes.size());
            for (const auto& n : o7.nodes) {
                l.bary.push_back(n.bary);
                l.o7_ref_weights.push_back(n.weight);
            }
            l.q3_begin = static_cast<int>(l.bary.size());
            l.q3_count = static_cast<int>(q3.nodes.size());
            for (const auto& n : q3.nodes) {
                l.bary.push_back(n.bary);
                l.q3_ref_weights.push_back(n.weight);
            }
            return l;
        }();
        return layout;
    }

    int slots() const { return static_cast<int>(bary.size()); }

    int lattice_begin(int degree) const {
        if (degree == 3) return lat3_begin;
        if (degree == 2) return lat2_begin;
        return -1;
    }
    int lattice_count(int degree) const {
        if (degree == 3) return lat3_count;
        if (degree == 2) return lat2_count;
        return -1;
    }
};

// everything the elemental terms need, evaluated at the slot points
struct ElementSamples {
    ElementFrame frame;
    double h = 0.0;
    double jacobian = 0.0;  // 2 |E|
    std::vector<Vec2> points;
    std::vector<double> u;
    std::vector<Vec2> grad_u;
    std::vector<double> f, mu, sigma;
    std::vector<Vec2> beta;
};

ElementSamples sample_element(const Mesh& mesh, int element, const ProblemSpec& data,
                              const Field* field) {
    const SlotLayout& layout = SlotLayout::get();
    ElementSamples s;
    s.frame = ElementFrame::from(mesh, element);
    s.h = mesh.diameter[element];
    s.jacobian = 2.0 * s.frame.area;
    const int n = layout.slots();
    s.points.resize(n);
    for (int i = 0; i < n; ++i) s.points[i] = s.frame.point(layout.bary[i]);
    if (field) {
        s.u.resize(n);
        s.grad_u.resize(n);
        field->eval_batch(s.points, s.u, s.grad_u);
    }
    s.f.resize(n);
    s.mu.resize(n);
    s.sigma.resize(n);
    s.beta.resize(n);
    for (int i = 0; i < n; ++i) {
        s.f[i] = data.f(s.points[i]);
        s.mu[i] = data.mu(s.points[i]);
        s.sigma[i] = data.sigma(s.points[i]);
        s.beta[i] = data.beta(s.points[i]);
    }
    return s;
}

// mean-preserving projection of sampled values: Lagrange interpolation at the
// lattice slots plus the order-7 constant correction
ElementPoly project_samples(const ElementSamples& s, int degree,
                            const std::vector<double>& values) {
    const SlotLayout& layout = SlotLayout::get();
    const int lb = layout.lattice_begin(degree);
    const int lc = layout.lattice_count(degree);
    if (lb < 0) throw std::invalid_argument("project: unsupported degree");
    std::vector<double> nodal(values.begin() + lb, values.begin() + lb + lc);
    for (double v : nodal) {
        if (!std::isfinite(v)) throw std::domain_error("project: non-finite value at lattice node");
    }
    ElementPoly p = interpolate_lattice(degree, nodal);
    // integral defect of the interpolant, order-7 rule
    double defect = 0.0;
    for (int i = 0; i < layout.o7_count; ++i) {
        const int slot = layout.o7_begin + i;
        const double w = layout.o7_ref_weights[i] * s.jacobian;
        defect += w * (values[slot] - p.eval(layout.bary[slot]));
    }
    p.add_constant(defect / std::abs(s.frame.area));
    return p;
}

double continuous_norm(const ElementSamples& s, const std::vector<double>& values,
                       const ElementPoly& p) {
    const SlotLayout& layout = SlotLayout::get();
    double sum = 0.0;
    for (int i = 0; i < layout.o7_count; ++i) {
        const int slot = layout.o7_begin + i;
        const double d = values[slot] - p.eval(layout.bary[slot]);
        sum += layout.o7_ref_weights[i] * s.jacobian * d * d;
    }
    return std::sqrt(sum);
}

double discrete_norm(const ElementSamples& s, const std::vector<double>& values,
                     const ElementPoly& p) {
    const SlotLayout& layout = SlotLayout::get();
    double sum = 0.0;
    for (int i = 0; i < layout.q3_count; ++i) {
        const int slot = layout.q3_begin + i;
        const double d = values[slot] - p.eval(layout.bary[slot]);
        sum += layout.q3_ref_weights[i] * s.jacobian * d * d;
    }
    return std::sqrt(sum);
}

struct ElementTerms {
    ElementFrame frame;
    double h = 0.0;
    ElementPoly flux_x, flux_y;  // degree-q projection of mu grad u
    ElementPoly bulk;            // degree q-1
    double bulk_norm = 0.0;      // ||bulk||_{0,E}
    std::array<double, 2> rhs{};
    std::array<double, 6> coef{};
};

ElementTerms compute_element_terms(const ElementSamples& s) {
    const SlotLayout& layout = SlotLayout::get();
    const int n = layout.slots();

    std::vector<double> flux_x_vals(n), flux_y_vals(n), adv_vals(n), react_vals(n);
    for (int i = 0; i < n; ++i) {
        flux_x_vals[i] = s.mu[i] * s.grad_u[i].x;
        flux_y_vals[i] = s.mu[i] * s.grad_u[i].y;
        adv_vals[i] = dot(s.beta[i], s.grad_u[i]);
        react_vals[i] = s.sigma[i] * s.u[i];
    }

    ElementTerms t;
    t.frame = s.frame;
    t.h = s.h;
    t.flux_x = project_samples(s, 3, flux_x_vals);
    t.flux_y = project_samples(s, 3, flux_y_vals);
    const ElementPoly f2 = project_samples(s, 2, s.f);
    const ElementPoly f3 = project_samples(s, 3, s.f);
    const ElementPoly adv2 = project_samples(s, 2, adv_vals);
    const ElementPoly adv3 = project_samples(s, 3, adv_vals);
    const ElementPoly react2 = project_samples(s, 2, react_vals);
    const ElementPoly react3 = project_samples(s, 3, react_vals);

    // bulk = Pi_{q-1} f + div Pi_q (mu grad u) - Pi_{q-1}(beta.grad u + sigma u)
    const auto dflux_x = poly_gradient(t.flux_x, s.frame);
    const auto dflux_y = poly_gradient(t.flux_y, s.frame);
    t.bulk = f2;
    t.bulk += dflux_x[0];
    t.bulk += dflux_y[1];
    t.bulk -= adv2;
    t.bulk -= react2;

    {
        double sum = 0.0;
        for (int i = 0; i < layout.o7_count; ++i) {
            const int slot = layout.o7_begin + i;
            const double v = t.bulk.eval(layout.bary[slot]);
            sum += layout.o7_ref_weights[i] * s.jacobian * v * v;
        }
        t.bulk_norm = std::sqrt(sum);
    }

    t.rhs[0] = s.h * continuous_norm(s, s.f, f2);
    t.rhs[1] = s.h * discrete_norm(s, s.f, f2) + discrete_norm(s, s.f, f3);

    // vector oscillation of the diffusive flux, continuous and discrete
    {
        double sum7 = 0.0, sum3 = 0.0;
        for (int i = 0; i < layout.o7_count; ++i) {
            const int slot = layout.o7_begin + i;
            const double dx = flux_x_vals[slot] - t.flux_x.eval(layout.bary[slot]);
            const double dy = flux_y_vals[slot] - t.flux_y.eval(layout.bary[slot]);
            sum7 += layout.o7_ref_weights[i] * s.jacobian * (dx * dx + dy * dy);
        }
        for (int i = 0; i < layout.q3_count; ++i) {
            const int slot = layout.q3_begin + i;
            const double dx = flux_x_vals[slot] - t.flux_x.eval(layout.bary[slot]);
            const double dy = flux_y_vals[slot] - t.flux_y.eval(layout.bary[slot]);
            sum3 += layout.q3_ref_weights[i] * s.jacobian * (dx * dx + dy * dy);
        }
        t.coef[0] = std::sqrt(sum7);
        t.coef[3] = std::sqrt(sum3);
    }
    t.coef[1] = s.h * continuous_norm(s, adv_vals, adv2);
    t.coef[2] = s.h * continuous_norm(s, react_vals, react2);
    t.coef[4] = s.h * discrete_norm(s, adv_vals, adv2) + discrete_norm(s, adv_vals, adv3);
    t.coef[5] = s.h * discrete_norm(s, react_vals, react2) + discrete_norm(s, react_vals, react3);
    return t;
}

// outward unit normal of the element across the edge (a, b)
Vec2 outward_normal(const ElementFrame& frame, Vec2 a, Vec2 b) {
    Vec2 n = perp(b - a);
    n = (1.0 / norm(n)) * n;
    const Vec2 centroid = (1.0 / 3.0) * (frame.v[0] + frame.v[1] + frame.v[2]);
    if (dot(n, centroid - 0.5 * (a + b)) > 0.0) n = -n;
    return n;
}

double edge_jump_norm(const EdgeJump& jump) {
    if (jump.zero) return 0.0;
    const GaussSegment& gauss = gauss_segment(4);
    double sum = 0.0;
    for (size_t j = 0; j < gauss.points.size(); ++j) {
        const double v = jump.eval(gauss.points[j]);
        sum += gauss.weights[j] * jump.length * v * v;
    }
    return std::sqrt(sum);
}

}  // namespace

PolyProjection project(const Mesh& mesh, int element, int degree, const PointFn& f) {
    // sampling needs only the slot geometry; reuse the element sampler without a field
    static const ProblemSpec dummy = [] {
        ProblemSpec d;
        d.mu = [](Vec2) { return 1.0; };
        d.beta = [](Vec2) { return Vec2{0.0, 0.0}; };
        d.sigma = [](Vec2) { return 0.0; };
        d.f = [](Vec2) { return 0.0; };
        return d;
    }();
    ElementSamples s = sample_element(mesh, element, dummy, nullptr);
    std::vector<double> values(s.points.size());
    for (size_t i = 0; i < s.points.size(); ++i) values[i] = f(s.points[i]);
    return {element, project_samples(s, degree, values)};
}

VectorProjection project_vector(const Mesh& mesh, int element, int degree,
                                const std::function<Vec2(Vec2)>& f) {
    PolyProjection px = project(mesh, element, degree, [&f](Vec2 p) { return f(p).x; });
    PolyProjection py = project(mesh, element, degree, [&f](Vec2 p) { return f(p).y; });
    return {element, std::move(px.poly), std::move(py.poly)};
}

double EdgeJump::eval(double t) const {
    if (zero) return 0.0;
    const Vec2 p = a + t * (b - a);
    const auto l1 = frame1.bary(p);
    const auto l2 = frame2.bary(p);
    const Vec2 flux1{flux1_x.eval(l1), flux1_y.eval(l1)};
    const Vec2 flux2{flux2_x.eval(l2), flux2_y.eval(l2)};
    return dot(flux1, n1) + dot(flux2, n2);
}

double EdgeJump::l2_norm() const { return edge_jump_norm(*this); }

EdgeJump edge_jump(const Mesh& mesh, int edge, const ProblemSpec& data, const Field& field) {
    const Edge& e = mesh.edges[edge];
    EdgeJump jump;
    jump.a = mesh.vertices[e.v[0]];
    jump.b = mesh.vertices[e.v[1]];
    jump.length = norm(jump.b - jump.a);
    if (e.boundary()) return jump;  // zero by definition on the boundary
    jump.zero = false;

    auto flux = [&](int element, ElementFrame& frame, ElementPoly& fx, ElementPoly& fy) {
        ElementSamples s = sample_element(mesh, element, data, &field);
        frame = s.frame;
        const SlotLayout& layout = SlotLayout::get();
        std::vector<double> vx(layout.slots()), vy(layout.slots());
        for (int i = 0; i < layout.slots(); ++i) {
            vx[i] = s.mu[i] * s.grad_u[i].x;
            vy[i] = s.mu[i] * s.grad_u[i].y;
        }
        fx = project_samples(s, 3, vx);
        fy = project_samples(s, 3, vy);
    };
    flux(e.tri[0], jump.frame1, jump.flux1_x, jump.flux1_y);
    flux(e.tri[1], jump.frame2, jump.flux2_x, jump.flux2_y);
    jump.n1 = outward_normal(jump.frame1, jump.a, jump.b);
    jump.n2 = -jump.n1;
    return jump;
}

ElementPoly bulk_residual(const Mesh& mesh, int element, const ProblemSpec& data,
                          const Field& field) {
    ElementSamples s = sample_element(mesh, element, data, &field);
    return compute_element_terms(s).bulk;
}

double eta_res(const Mesh& mesh, int element, const ProblemSpec& data, const Field& field) {
    ElementSamples s = sample_element(mesh, element, data, &field);
    const ElementTerms t = compute_element_terms(s);
    double edge_sum = 0.0;
    for (int local = 0; local < 3; ++local) {
        const int eid = mesh.tri_edges[element][local];
        edge_sum += edge_jump(mesh, eid, data, field).l2_norm();
    }
    return t.h * t.bulk_norm + std::sqrt(t.h) * edge_sum;
}

std::array<double, 2> eta_rhs(const Mesh& mesh, int element, const ProblemSpec& data) {
    ElementSamples s = sample_element(mesh, element, data, nullptr);
    // rhs terms need no field; fill zero samples so the shared path can run
    s.u.assign(s.points.size(), 0.0);
    s.grad_u.assign(s.points.size(), Vec2{0.0, 0.0});
    return compute_element_terms(s).rhs;
}

std::array<double, 6> eta_coef(const Mesh& mesh, int element, const ProblemSpec& data,
                               const Field& field) {
    ElementSamples s = sample_element(mesh, element, data, &field);
    return compute_element_terms(s).coef;
}

double eta_loss_local(const Mesh& mesh, const InteriorIndexMap& map, int element,
                      const ResidualVector& r, double C_h) {
    double sum = 0.0;
    for (int idx : elemental_index_set(mesh, map, element)) {
        sum += r.values[idx] * r.values[idx];
    }
    return C_h * std::sqrt(sum);
}

double eta_loss_global(const ResidualVector& r, double C_h) {
    return C_h * std::sqrt(r.loss());
}

EstimatorBreakdown assemble_breakdown(const Mesh& mesh, const Field& field,
                                      const ProblemSpec& data, const ResidualVector& r,
                                      double C_h) {
    const int nt = mesh.num_triangles();
    const InteriorIndexMap map(mesh);
    if (static_cast<int>(r.values.size()) != map.size()) {
        throw std::invalid_argument("assemble_breakdown: residual vector does not match mesh");
    }

    EstimatorBreakdown out;
    out.C_h = C_h;
    out.res.assign(nt, 0.0);
    out.loss.assign(nt, 0.0);
    out.coef.assign(nt, {});
    out.rhs.assign(nt, {});
    out.total.assign(nt, 0.0);

    // batched field evaluation over every element's slot points
    const SlotLayout& layout = SlotLayout::get();
    const int slots = layout.slots();
    std::vector<Vec2> all_points(static_cast<size_t>(nt) * slots);
    std::vector<ElementFrame> frames(nt);
    for (int t = 0; t < nt; ++t) {
        frames[t] = ElementFrame::from(mesh, t);
        for (int i = 0; i < slots; ++i) {
            all_points[static_cast<size_t>(t) * slots + i] = frames[t].point(layout.bary[i]);
        }
    }
    std::vector<double> all_u(all_points.size());
    std::vector<Vec2> all_grad(all_points.size());
    field.eval_batch(all_points, all_u, all_grad);

    std::vector<ElementTerms> terms(nt);
    std::vector<double> edge_sums(nt, 0.0);
    for (int t = 0; t < nt; ++t) {
        ElementSamples s;
        s.frame = frames[t];
        s.h = mesh.diameter[t];
        s.jacobian = 2.0 * s.frame.area;
        const size_t base = static_cast<size_t>(t) * slots;
        s.points.assign(all_points.begin() + base, all_points.begin() + base + slots);
        s.u.assign(all_u.begin() + base, all_u.begin() + base + slots);
        s.grad_u.assign(all_grad.begin() + base, all_grad.begin() + base + slots);
        s.f.resize(slots);
        s.mu.resize(slots);
        s.sigma.resize(slots);
        s.beta.resize(slots);
        for (int i = 0; i < slots; ++i) {
            const Vec2 p = s.points[i];
            s.f[i] = data.f(p);
            s.mu[i] = data.mu(p);
            s.sigma[i] = data.sigma(p);
            s.beta[i] = data.beta(p);
        }
        terms[t] = compute_element_terms(s);
    }

    const GaussSegment& gauss = gauss_segment(4);
    for (int eid = 0; eid < mesh.num_edges(); ++eid) {
        const Edge& e = mesh.edges[eid];
        if (e.boundary()) continue;
        const Vec2 a = mesh.vertices[e.v[0]];
        const Vec2 b = mesh.vertices[e.v[1]];
        const double len = norm(b - a);
        const ElementTerms& t1 = terms[e.tri[0]];
        const ElementTerms& t2 = terms[e.tri[1]];
        const Vec2 n1 = outward_normal(t1.frame, a, b);
        const Vec2 n2 = -n1;
        double sum = 0.0;
        for (size_t j = 0; j < gauss.points.size(); ++j) {
            const Vec2 p = a + gauss.points[j] * (b - a);
            const auto l1 = t1.frame.bary(p);
            const auto l2 = t2.frame.bary(p);
            const double v = dot(Vec2{t1.flux_x.eval(l1), t1.flux_y.eval(l1)}, n1) +
                             dot(Vec2{t2.flux_x.eval(l2), t2.flux_y.eval(l2)}, n2);
            sum += gauss.weights[j] * len * v * v;
        }
        const double jump_norm = std::sqrt(sum);
        edge_sums[e.tri[0]] += jump_norm;
        edge_sums[e.tri[1]] += jump_norm;
    }

    double res_sq = 0.0, coef_sq = 0.0, rhs_sq = 0.0, local_sq = 0.0;
    for (int t = 0; t < nt; ++t) {
        out.res[t] = terms[t].h * terms[t].bulk_norm + std::sqrt(terms[t].h) * edge_sums[t];
        out.coef[t] = terms[t].coef;
        out.rhs[t] = terms[t].rhs;
        out.loss[t] = eta_loss_local(mesh, map, t, r, C_h);
        double total_sq = out.res[t] * out.res[t] + out.loss[t] * out.loss[t];
        for (double c : out.coef[t]) total_sq += c * c;
        for (double c : out.rhs[t]) total_sq += c * c;
        out.total[t] = std::sqrt(total_sq);

        res_sq += out.res[t] * out.res[t];
        for (double c : out.coef[t]) coef_sq += c * c;
        for (double c : out.rhs[t]) rhs_sq += c * c;
        local_sq += total_sq;
    }
    out.eta_res = std::sqrt(res_sq);
    out.eta_coef = std::sqrt(coef_sq);
    out.eta_rhs = std::sqrt(rhs_sq);
    out.eta_loss = eta_loss_global(r, C_h);
    out.eta = out.eta_res + out.eta_loss + out.eta_coef + out.eta_rhs;
    out.eta_localized = std::sqrt(local_sq);
    return out;
}

double efficiency_index(const EstimatorBreakdown& breakdown, double true_error) {
    if (!(true_error > 0.0)) {
        throw std::invalid_argument("efficiency_index: true error must be positive");
    }
    return breakdown.eta / true_error;
}

void save_breakdown_csv(const EstimatorBreakdown& breakdown, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "E,eta_res,eta_loss,eta_coef_1,eta_coef_2,eta_coef_3,eta_coef_4,eta_coef_5,"
           "eta_coef_6,eta_rhs_1,eta_rhs_2,eta_E\n";
    const int nt = static_cast<int>(breakdown.res.size());
    for (int t = 0; t < nt; ++t) {
        out << t << ',' << format_g17(breakdown.res[t]) << ',' << format_g17(breakdown.loss[t]);
        for (double c : breakdown.coef[t]) out << ',' << format_g17(c);
        for (double c : breakdown.rhs[t]) out << ',' << format_g17(c);
        out << ',' << format_g17(breakdown.total[t]) << '\n';
    }
    // trailing summary: global aggregates (per-family roots of sums of squares)
    out << "global," << format_g17(breakdown.eta_res) << ',' << format_g17(breakdown.eta_loss);
    double coef_sq[6] = {};
    double rhs_sq[2] = {};
    for (int t = 0; t < nt; ++t) {
        for (int k = 0; k < 6; ++k) coef_sq[k] += breakdown.coef[t][k] * breakdown.coef[t][k];
        for (int k = 0; k < 2; ++k) rhs_sq[k] += breakdown.rhs[t][k] * breakdown.rhs[t][k];
    }
    for (double c : coef_sq) out << ',' << format_g17(std::sqrt(c));
    for (double c : rhs_sq) out << ',' << format_g17(std::sqrt(c));
    out << ',' << format_g17(breakdown.eta) << '\n';
}

}  // namespace vpinn
