#ifndef TRIONPOL_MATERIALS_HPP
#define TRIONPOL_MATERIALS_HPP

#include "trionpol/model.hpp"

#include <cmath>
#include <stdexcept>

namespace trionpol {

// CODATA 2018 values, SI.
namespace constants {
inline constexpr double hbar = 1.054571817e-34;      // J s
inline constexpr double e_charge = 1.602176634e-19;  // C (exact)
inline constexpr double eps0 = 8.854187813e-12;      // F/m
inline constexpr double m_electron = 9.109383702e-31; // kg

inline constexpr double joule_to_mev = 1.0e3 / e_charge;
inline constexpr double um_to_m = 1.0e-6;
inline constexpr double um2_to_m2 = 1.0e-12;
inline constexpr double per_cm2_to_per_um2 = 1.0e-8;
} // namespace constants

// Device and material inputs for a TMD monolayer in an open cavity.
struct MaterialParams {
    double lambda1_nm = 0.0;   // inner trion radius
    double lambda2_nm = 0.0;   // outer trion radius
    double xi = 1.0;           // antinode placement, 0..1
    double epsilon = 1.0;      // medium permittivity
    double m_e = 0.0;          // electron mass, units of m0
    double m_h = 0.0;          // hole mass, units of m0
    double l_cav_um = 0.0;     // cavity length
    double area_um2 = 0.0;     // cavity area
    double density_per_cm2 = 0.0; // electron areal density

    double reduced_mass() const { return 1.0 / (1.0 / m_e + 1.0 / m_h); }

    void validate() const
    {
        if (lambda1_nm <= 0.0 || lambda2_nm <= 0.0)
            throw std::invalid_argument("MaterialParams: trion radii must be > 0");
        if (xi < 0.0 || xi > 1.0)
            throw std::invalid_argument("MaterialParams: xi must lie in [0, 1]");
        if (epsilon < 1.0)
            throw std::invalid_argument("MaterialParams: epsilon must be >= 1");
        if (m_e <= 0.0 || m_h <= 0.0)
            throw std::invalid_argument("MaterialParams: effective masses must be > 0");
        if (l_cav_um <= 0.0 || area_um2 <= 0.0)
            throw std::invalid_argument("MaterialParams: cavity dimensions must be > 0");
        if (density_per_cm2 <= 0.0)
            throw std::invalid_argument("MaterialParams: electron density must be > 0");
    }

    bool operator==(const MaterialParams&) const = default;
};

// Trion confinement coefficient from the two-radius relative-motion
// wavefunction. The radius powers cancel between numerator and denominator,
// so the value is scale invariant; radii are quoted in nm by convention.
inline double chi_t(double lambda1_nm, double lambda2_nm)
{
    if (lambda1_nm <= 0.0 || lambda2_nm <= 0.0)
        throw std::invalid_argument("chi_t: radii must be > 0");
    const double l1 = lambda1_nm, l2 = lambda2_nm;
    const double sum2 = l1 * l1 + l2 * l2;
    const double sum4 = std::pow(l1 + l2, 4);
    const double num = 8.0 * sum2 * sum2 * sum4;
    const double den = l1 * l1 * l2 * l2 * sum4 + 16.0 * std::pow(l1 * l2, 4);
    return std::sqrt(num / den);
}

// Bare electron-hole pair coupling, in meV:
// g0 = sqrt(xi^2 hbar^2 e^2 / (eps eps0 mu m0 L_cav A)).
inline double g0(const MaterialParams& mp)
{
    mp.validate();
    using namespace constants;
    const double mu_kg = mp.reduced_mass() * m_electron;
    const double val = std::sqrt(mp.xi * mp.xi * hbar * hbar * e_charge * e_charge /
                                 (mp.epsilon * eps0 * mu_kg * mp.l_cav_um * um_to_m *
                                  mp.area_um2 * um2_to_m2));
    return val * joule_to_mev;
}

// Electrons available within the cavity area, round-half-up.
inline int electron_count(const MaterialParams& mp)
{
    const double n = mp.density_per_cm2 * constants::per_cm2_to_per_um2 * mp.area_um2;
    return static_cast<int>(std::floor(n + 0.5));
}

// Compile device inputs into model parameters (energies in meV, zero
// cavity-trion detuning; the drive is left unset).
inline ModelParams derive_model_params(const MaterialParams& mp, double gamma_c_mev,
                                       double gamma_t_mev)
{
    mp.validate();
    if (gamma_c_mev < 0.0 || gamma_t_mev < 0.0)
        throw std::invalid_argument("derive_model_params: decay rates must be >= 0");
    const int n_s = electron_count(mp);
    if (n_s < 1)
        throw std::invalid_argument(
            "derive_model_params: density * area yields zero available electrons");
    const double gc = g0(mp) * chi_t(mp.lambda1_nm, mp.lambda2_nm);
    ModelParams p = ModelParams::with_single_coupling(n_s, gc);
    p.gamma_c = gamma_c_mev;
    p.gamma_t = gamma_t_mev;
    p.omega_cav = 0.0;
    p.omega_t = 0.0;
    return p;
}

// omega_L = (omega_cav + omega_t)/2 - sqrt(Omega^2 + delta^2)/2
inline double lower_polariton(double omega_cav, double omega_t, double omega_rabi)
{
    const double delta = omega_cav - omega_t;
    return 0.5 * (omega_cav + omega_t) -
           0.5 * std::sqrt(omega_rabi * omega_rabi + delta * delta);
}

} // namespace trionpol

#endif
