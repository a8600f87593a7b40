//! Named algebras used by the test suites and the CLI self-test.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Presentation, QuadraticAlgebra};
use crate::linalg::SparseVec;
use crate::scalars::Field;

/// k⟨x,y⟩/(x², y² − xy): six-dimensional and not Koszul.
pub const EXAMPLE_TEXT: &str = "field Q\ngens x y\nrel x*x\nrel y*y - x*y\n";

pub fn gen_names(n: usize) -> Vec<String> {
    const SHORT: [&str; 4] = ["x", "y", "z", "w"];
    if n <= SHORT.len() {
        SHORT[..n].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=n).map(|i| format!("x{i}")).collect()
    }
}

fn build(field: Field, n: usize, relations: Vec<SparseVec>, bound: usize) -> QuadraticAlgebra {
    let (pres, _) = Presentation::new(field, gen_names(n), &relations);
    QuadraticAlgebra::new(pres, bound)
}

pub fn example(bound: usize) -> QuadraticAlgebra {
    QuadraticAlgebra::from_text(EXAMPLE_TEXT, bound).expect("built-in presentation parses")
}

/// S(V): relations x_i x_j − x_j x_i for i < j.
pub fn symmetric(n: usize, field: Field, bound: usize) -> QuadraticAlgebra {
    let mut rels = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            rels.push(SparseVec::from_entries([(i * n + j, field.one()), (j * n + i, -field.one())]));
        }
    }
    build(field, n, rels, bound)
}

/// T(V): no relations.
pub fn tensor_algebra(n: usize, field: Field, bound: usize) -> QuadraticAlgebra {
    build(field, n, vec![], bound)
}

/// k[x].
pub fn polynomial(field: Field, bound: usize) -> QuadraticAlgebra {
    tensor_algebra(1, field, bound)
}

/// k⟨x,y⟩/(xy, x²).
pub fn monomial_xy_xx(field: Field, bound: usize) -> QuadraticAlgebra {
    build(field, 2, vec![SparseVec::unit(1, field), SparseVec::unit(0, field)], bound)
}

/// n generators and r linearly independent relations with coefficients in
/// {−2, …, 2}, reproducible from the seed.
pub fn random_algebra(seed: u64, field: Field, n: usize, r: usize, bound: usize) -> QuadraticAlgebra {
    assert!(r <= n * n, "at most n² independent relations");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let rels: Vec<SparseVec> = (0..r)
            .map(|_| SparseVec::from_entries((0..n * n).map(|w| (w, field.from_i64(rng.gen_range(-2..=2))))))
            .collect();
        let (pres, warnings) = Presentation::new(field, gen_names(n), &rels);
        if warnings.is_empty() {
            return QuadraticAlgebra::new(pres, bound);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_algebras_are_reproducible() {
        let a = random_algebra(5, Field::Prime(7), 2, 2, 4);
        let b = random_algebra(5, Field::Prime(7), 2, 2, 4);
        assert_eq!(a.presentation(), b.presentation());
        assert_eq!(a.relations().dim(), 2);
    }

    #[test]
    fn names() {
        assert_eq!(gen_names(2), vec!["x", "y"]);
        assert_eq!(gen_names(5)[4], "x5");
    }
}
