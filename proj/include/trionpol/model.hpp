#ifndef TRIONPOL_MODEL_HPP
#define TRIONPOL_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace trionpol {

// Physical rates and energies of the cavity-trion system. All energies share
// one unit (hbar = 1); the unit itself is carried as metadata by the caller.
// The collective Rabi energy is stored; the single-trion coupling is derived
// as g_c = omega_rabi / sqrt(n_s) so the two can never drift apart.
struct ModelParams {
    int n_s = 1;              // electrons available for trion formation
    double omega_cav = 0.0;   // cavity mode energy
    double omega_t = 0.0;     // trion excitation energy
    double omega_rabi = 0.0;  // collective Rabi energy
    double gamma_c = 0.0;     // cavity decay rate
    double gamma_t = 0.0;     // trion decay rate
    std::optional<double> pump_p;  // coherent drive amplitude
    std::optional<double> omega_p; // drive frequency

    static ModelParams with_rabi(int n_s, double omega_rabi)
    {
        ModelParams p;
        p.n_s = n_s;
        p.omega_rabi = omega_rabi;
        p.validate();
        return p;
    }

    static ModelParams with_single_coupling(int n_s, double g_c)
    {
        ModelParams p;
        p.n_s = n_s;
        p.omega_rabi = g_c * std::sqrt(static_cast<double>(n_s));
        p.validate();
        return p;
    }

    double g_c() const { return omega_rabi / std::sqrt(static_cast<double>(n_s)); }
    void set_g_c(double g) { omega_rabi = g * std::sqrt(static_cast<double>(n_s)); }

    // cavity-trion detuning
    double delta_ct() const { return omega_cav - omega_t; }

    // pump detuning Delta = omega_cav - omega_p
    std::optional<double> delta() const
    {
        if (!omega_p) return std::nullopt;
        return omega_cav - *omega_p;
    }
    void set_delta(double d) { omega_p = omega_cav - d; }

    void validate() const
    {
        if (n_s < 1) throw std::invalid_argument("ModelParams: n_s must be >= 1");
        if (gamma_c < 0.0 || gamma_t < 0.0)
            throw std::invalid_argument("ModelParams: decay rates must be >= 0");
        if (!(std::isfinite(omega_cav) && std::isfinite(omega_t) && std::isfinite(omega_rabi)))
            throw std::invalid_argument("ModelParams: non-finite energy");
    }

    bool operator==(const ModelParams&) const = default;
};

// Fock-space cutoffs. The trion ladder is additionally capped by the Pauli
// ceiling at n_s, so the stored n_t_max is an upper bound, not the dimension.
struct Truncation {
    int n_c_max = 10;
    int n_t_max = 10;

    int n_t_dim(int n_s) const { return std::min(n_t_max, n_s) + 1; }
    int n_c_dim() const { return n_c_max + 1; }
    int dim(int n_s) const { return n_c_dim() * n_t_dim(n_s); }

    void validate() const
    {
        if (n_c_max < 0 || n_t_max < 0)
            throw std::invalid_argument("Truncation: cutoffs must be >= 0");
    }

    bool operator==(const Truncation&) const = default;
};

} // namespace trionpol

#endif
