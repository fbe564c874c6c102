#pragma once

#include <cstddef>
#include <span>

#include "dcnet/ode/types.hpp"

namespace dcnet::ode {

/// Embedded explicit Runge-Kutta pairs with the coefficient values of the
/// reference scipy implementations (Bogacki-Shampine 3(2), Dormand-Prince
/// 5(4), Dormand-Prince 8(5,3)). `a` is row-major stages x stages; `e` has
/// stages + 1 entries, the last one weighting f(t + h, y_new).
namespace coeff {

inline constexpr double rk23_c[] = {
    0.0, 0.5, 0.75};
inline constexpr double rk23_a[] = {
    0.0, 0.0, 0.0,
    0.5, 0.0, 0.0,
    0.0, 0.75, 0.0};
inline constexpr double rk23_b[] = {
    0.2222222222222222, 0.3333333333333333, 0.4444444444444444};
inline constexpr double rk23_e[] = {
    0.06944444444444445, -0.08333333333333333, -0.1111111111111111, 0.125};
inline constexpr double rk45_c[] = {
    0.0, 0.2, 0.3, 0.8,
    0.8888888888888888, 1.0};
inline constexpr double rk45_a[] = {
    0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    0.2, 0.0, 0.0, 0.0, 0.0, 0.0,
    0.075, 0.225, 0.0, 0.0, 0.0, 0.0,
    0.9777777777777777, -3.7333333333333334, 3.5555555555555554, 0.0, 0.0, 0.0,
    2.9525986892242035, -11.595793324188385, 9.822892851699436, -0.2908093278463649, 0.0, 0.0,
    2.8462752525252526, -10.757575757575758, 8.906422717743473, 0.2784090909090909, -0.2735313036020583, 0.0};
inline constexpr double rk45_b[] = {
    0.09114583333333333, 0.0, 0.44923629829290207, 0.6510416666666666,
    -0.322376179245283, 0.13095238095238096};
inline constexpr double rk45_e[] = {
    -0.0012326388888888888, 0.0, 0.0042527702905061394, -0.03697916666666667,
    0.05086379716981132, -0.0419047619047619, 0.025};
inline constexpr double dop853_c[] = {
    0.0, 0.05260015195876773, 0.0789002279381516, 0.1183503419072274,
    0.2816496580927726, 0.3333333333333333, 0.25, 0.3076923076923077,
    0.6512820512820513, 0.6, 0.8571428571428571, 1.0};
inline constexpr double dop853_a[] = {
    0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    0.05260015195876773, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    0.0197250569845379, 0.0591751709536137, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    0.02958758547680685, 0.0, 0.08876275643042054, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    0.03709200011850479, 0.0, 0.0, 0.17038392571223998, 0.10726203044637328, -0.015319437748624402, 0.008273789163814023, 0.0, 0.0, 0.0, 0.0, 0.0,
    0.6241109587160757, 0.0, 0.0, -3.3608926294469414, -0.868219346841726, 27.59209969944671, 20.154067550477894, -43.48988418106996, 0.0, 0.0, 0.0, 0.0,
    0.47766253643826434, 0.0, 0.0, -2.4881146199716677, -0.590290826836843, 21.230051448181193, 15.279233632882423, -33.28821096898486, -0.020331201708508627, 0.0, 0.0, 0.0,
    -0.9371424300859873, 0.0, 0.0, 5.186372428844064, 1.0914373489967295, -8.149787010746927, -18.52006565999696, 22.739487099350505, 2.4936055526796523, -3.0467644718982196, 0.0, 0.0,
    2.273310147516538, 0.0, 0.0, -10.53449546673725, -2.0008720582248625, -17.9589318631188, 27.94888452941996, -2.8589982771350235, -8.87285693353063, 12.360567175794303, 0.6433927460157636, 0.0};
inline constexpr double dop853_b[] = {
    0.054293734116568765, 0.0, 0.0, 0.0,
    0.0, 4.450312892752409, 1.8915178993145003, -5.801203960010585,
    0.3111643669578199, -0.1521609496625161, 0.20136540080403034, 0.04471061572777259};
inline constexpr double dop853_e3[] = {
    -0.18980075407240762, 0.0, 0.0, 0.0,
    0.0, 4.450312892752409, 1.8915178993145003, -5.801203960010585,
    -0.4226823213237919, -0.1521609496625161, 0.20136540080403034, 0.02265179219836082,
    0.0};
inline constexpr double dop853_e5[] = {
    0.01312004499419488, 0.0, 0.0, 0.0,
    0.0, -1.2251564463762044, -0.4957589496572502, 1.6643771824549864,
    -0.35032884874997366, 0.3341791187130175, 0.08192320648511571, -0.022355307863886294,
    0.0};

}  // namespace coeff

struct ExplicitTableau {
    Method method;
    int stages;
    int order;
    int error_order;
    std::span<const double> c;
    std::span<const double> a;
    std::span<const double> b;
    std::span<const double> e;   // local error weights (e5 for dop853)
    std::span<const double> e3;  // dop853 only: third-order estimate

    double a_at(int i, int j) const { return a[static_cast<std::size_t>(i * stages + j)]; }
    bool combined_error() const noexcept { return !e3.empty(); }
};

inline const ExplicitTableau& tableau(Method m) {
    static const ExplicitTableau rk23{Method::rk23, 3, 3, 2, coeff::rk23_c, coeff::rk23_a,
                                      coeff::rk23_b, coeff::rk23_e, {}};
    static const ExplicitTableau rk45{Method::rk45, 6, 5, 4, coeff::rk45_c, coeff::rk45_a,
                                      coeff::rk45_b, coeff::rk45_e, {}};
    static const ExplicitTableau dop853{Method::dop853, 12, 8, 7, coeff::dop853_c,
                                        coeff::dop853_a, coeff::dop853_b, coeff::dop853_e5,
                                        coeff::dop853_e3};
    switch (m) {
        case Method::rk23: return rk23;
        case Method::rk45: return rk45;
        case Method::dop853: return dop853;
        default: throw ConfigError("no explicit tableau for " + std::string(to_string(m)));
    }
}

}  // namespace dcnet::ode
