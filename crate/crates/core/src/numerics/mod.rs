//! Root finding, quadrature, special functions, tabulated functions and the
//! two bespoke solves (exponential AR stationary law, ARCH tail).

pub mod arch;
pub mod fixed_point;
pub mod grid;
pub mod quadrature;
pub mod root;
pub mod special;

pub use arch::{arch_stationary_fit, arch_stationary_fit_with, arch_tail_index, ArchFitOptions};
pub use fixed_point::{solve_fv_fixed_point, FvSolution};
pub use grid::{GridFunction, Interpolation};
pub use quadrature::{quadrature, quadrature_with_breaks};
pub use root::{bracket_root, solve_root, RootBracket, RootOptions};
