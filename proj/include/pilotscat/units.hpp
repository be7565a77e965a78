#pragma once

// Internal unit system.
//
// Lengths are in nm for the lattice-target models and in fm for the
// semiclassical (single-nucleus) model. Time is always in fs, masses in
// electron masses and energies in eV.

namespace pilotscat::units {

inline constexpr double pi = 3.14159265358979323846;

// CODATA 2018
inline constexpr double hbar_eV_fs = 0.6582119569;        // eV fs
inline constexpr double hbar_c_eV_nm = 197.3269804;       // eV nm
inline constexpr double electron_mass_eV = 510998.95;     // m_e c^2 [eV]
inline constexpr double c_nm_per_fs = 299.792458;         // nm / fs
inline constexpr double fine_structure = 7.2973525693e-3;

// e^2 / (4 pi eps0) [eV nm]
inline constexpr double coulomb_eV_nm = fine_structure * hbar_c_eV_nm;

// hbar / m_e [nm^2 / fs]
inline constexpr double hbar_over_me_nm2_fs = hbar_c_eV_nm * c_nm_per_fs / electron_mass_eV;

// hbar^2 / m_e [eV nm^2]
inline constexpr double hbar2_over_me_eV_nm2 = hbar_c_eV_nm * hbar_c_eV_nm / electron_mass_eV;

// m_e e^2 / (4 pi eps0 hbar^2) = 1 / a_Bohr [nm^-1]
inline constexpr double coupling_per_unit_nm = coulomb_eV_nm / hbar2_over_me_eV_nm2;

// m_e in eV fs^2 / nm^2
inline constexpr double electron_mass_eV_fs2_nm2 = electron_mass_eV / (c_nm_per_fs * c_nm_per_fs);

inline constexpr double nm_per_fm = 1.0e-6;
inline constexpr double fm_per_nm = 1.0e6;

// Same quantities expressed with fm as the length unit.
inline constexpr double hbar_over_me_fm2_fs = hbar_over_me_nm2_fs * fm_per_nm * fm_per_nm;
inline constexpr double coupling_per_unit_fm = coupling_per_unit_nm * nm_per_fm;
inline constexpr double coulomb_eV_fm = coulomb_eV_nm * fm_per_nm;

inline constexpr double seconds_per_fs = 1.0e-15;

}  // namespace pilotscat::units
