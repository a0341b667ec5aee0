//! Representations of framed braid groups, computed two ways.
//!
//! The exact side builds the framed Burau representation over
//! `Z[q^{±1}, t^{±1}]`, its reduced form, the subrepresentation spanned by the
//! `b` vectors and the classical Burau quotient, together with the
//! combinatorial rank identities of the multifork bases.
//!
//! The numerical side builds tensor products of confluent Verma modules over
//! the truncated current algebra `sl2[t]/t^{r+1}`, the confluent KZ connection
//! on their weight spaces, and integrates it around the generator loops of the
//! framed braid group to obtain monodromy matrices on the singular subspace.
//!
//! Module map:
//! - [`ring`]: exact Laurent polynomials, rational functions, `(-t)`-binomials.
//! - [`fbraid`]: framed braid words and the `Z^n ⋊ B_n` normal data.
//! - [`burau`]: framed Burau matrices, relation checks, the framed Alexander quantity.
//! - [`combinat`]: index sets and rank/dimension formulas.
//! - [`verma`]: confluent Verma modules, weight spaces, singular vectors.
//! - [`kz`]: Gaudin operators and the confluent KZ connection.
//! - [`monodromy`]: parallel transport, generator monodromies, comparison report.
//! - [`checks`]: the property suites behind `selftest` and the acceptance tests.

pub mod burau;
pub mod checks;
pub mod combinat;
pub mod fbraid;
pub mod kz;
pub mod linalg;
pub mod monodromy;
pub mod par;
pub mod ring;
pub mod scalar;
pub mod verma;

pub use burau::{framed_alexander, full_burau_matrix, reduced_burau_matrix, RepMatrix};
pub use combinat::{enumerate_k, rank_formulas, vandermonde_check, RankTable};
pub use fbraid::{parse_word, FramedBraidWord, Generator, Letter, SemidirectForm};
pub use ring::{qt_binomial, LaurentPoly2, RationalQT};
