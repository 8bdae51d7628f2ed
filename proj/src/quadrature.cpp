#include "vpinn/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace vpinn {

namespace {

// 6-point symmetric rule, algebraic precision 3 (Strang-Fix).
// Barycentric coordinates are the roots of 60 t^3 - 60 t^2 + 15 t - 1,
// taken in all six orderings; every weight is 1/12.
const QuadRule rule_p3{
    3,
    {
        {{0.10903900907287721, 0.23193336855303057, 0.65902762237409222}, 0.083333333333333333},
        {{0.10903900907287721, 0.65902762237409222, 0.23193336855303057}, 0.083333333333333333},
        {{0.23193336855303057, 0.10903900907287721, 0.65902762237409222}, 0.083333333333333333},
        {{0.23193336855303057, 0.65902762237409222, 0.10903900907287721}, 0.083333333333333333},
        {{0.65902762237409222, 0.10903900907287721, 0.23193336855303057}, 0.083333333333333333},
        {{0.65902762237409222, 0.23193336855303057, 0.10903900907287721}, 0.083333333333333333},
    },
};

// 16-point conical-product rule (Gauss-Jacobi x Gauss-Legendre), algebraic
// precision 7, all weights positive. The widely used 13-point precision-7
// table carries a negative centroid weight, which the positivity requirement
// rules out.
const QuadRule rule_p7{
    7,
    {
        {{0.87742880933046785, 0.057104196114517682, 0.065466994555014464}, 0.023568368193382332},
        {{0.63173125164112528, 0.057104196114517682, 0.31116455224435703}, 0.044185088522361726},
        {{0.31116455224435703, 0.057104196114517682, 0.63173125164112528}, 0.044185088522361726},
        {{0.065466994555014464, 0.057104196114517682, 0.87742880933046785}, 0.023568368193382332},
        {{0.6729468631505064, 0.27684301363812383, 0.050210123211369772}, 0.035388067898085946},
        {{0.48450832663043325, 0.27684301363812383, 0.23864865973144292}, 0.066344216107049734},
        {{0.23864865973144292, 0.27684301363812383, 0.48450832663043325}, 0.066344216107049734},
        {{0.050210123211369772, 0.27684301363812383, 0.6729468631505064}, 0.035388067898085946},
        {{0.38749748340669417, 0.58359043236891682, 0.028912084224389013}, 0.022584049282369931},
        {{0.27899046349650881, 0.58359043236891682, 0.13741910413457437}, 0.042339724521746289},
        {{0.13741910413457437, 0.58359043236891682, 0.27899046349650881}, 0.042339724521746289},
        {{0.028912084224389013, 0.58359043236891682, 0.38749748340669417}, 0.022584049282369931},
        {{0.13005607921683444, 0.86024013565621945, 0.0097037851269461122}, 0.0054232259105252545},
        {{0.093637784437328504, 0.86024013565621945, 0.046122079906452049}, 0.010167259564478787},
        {{0.046122079906452049, 0.86024013565621945, 0.093637784437328504}, 0.010167259564478787},
        {{0.0097037851269461122, 0.86024013565621945, 0.13005607921683444}, 0.0054232259105252545},
    },
};

const GaussSegment segment4{
    {0.069431844202973712, 0.33000947820757187, 0.66999052179242813, 0.93056815579702629},
    {0.17392742256872693, 0.32607257743127307, 0.32607257743127307, 0.17392742256872693},
};

}  // namespace

const QuadRule& reference_rule(int precision) {
    switch (precision) {
        case 3: return rule_p3;
        case 7: return rule_p7;
        default:
            throw std::invalid_argument("reference_rule: unsupported precision " +
                                        std::to_string(precision));
    }
}

const GaussSegment& gauss_segment(int n) {
    if (n != 4) throw std::invalid_argument("gauss_segment: only the 4-point rule is tabulated");
    return segment4;
}

MappedRule map_rule(const Mesh& mesh, int element, const QuadRule& rule) {
    MappedRule mapped;
    mapped.element = element;
    const Vec2 a = mesh.vertex(element, 0);
    const Vec2 b = mesh.vertex(element, 1);
    const Vec2 c = mesh.vertex(element, 2);
    const double jac = 2.0 * mesh.area(element);
    mapped.points.reserve(rule.nodes.size());
    mapped.weights.reserve(rule.nodes.size());
    for (const QuadNode& node : rule.nodes) {
        mapped.points.push_back(node.bary[0] * a + node.bary[1] * b + node.bary[2] * c);
        mapped.weights.push_back(node.weight * jac);
    }
    return mapped;
}

double integrate(const MappedRule& mapped, const PointFn& f) {
    double sum = 0.0;
    for (size_t i = 0; i < mapped.points.size(); ++i) {
        const double v = f(mapped.points[i]);
        if (!std::isfinite(v)) {
            throw std::domain_error("integrate: non-finite integrand value");
        }
        sum += v * mapped.weights[i];
    }
    return sum;
}

double integrate(const Mesh& mesh, int element, const PointFn& f, const QuadRule& rule) {
    return integrate(map_rule(mesh, element, rule), f);
}

double discrete_seminorm(const MappedRule& mapped, const PointFn& f) {
    return std::sqrt(integrate(mapped, [&f](Vec2 p) {
        const double v = f(p);
        return v * v;
    }));
}

double discrete_seminorm(const Mesh& mesh, int element, const PointFn& f, const QuadRule& rule) {
    return discrete_seminorm(map_rule(mesh, element, rule), f);
}

}  // namespace vpinn
