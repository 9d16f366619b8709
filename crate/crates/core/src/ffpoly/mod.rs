//! Reduced multivariate polynomials over F_p: every exponent is below p, so
//! the representation is unique per function on F_p^n.

mod interp;
mod parse;
mod poly;

pub use crate::field::FieldSpec;
pub use interp::{interpolate, interpolate_fn};
pub use parse::{parse_poly, parse_poly_named};
pub use poly::{compose, default_names, is_form_tuple, tuple_context, tuple_degree, Monomial, Poly};

