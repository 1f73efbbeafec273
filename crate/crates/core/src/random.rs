//! Seeded generators for the randomized property suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fields::{FieldSpec, SumTerm, VectorField};

pub const CENTER_RANGE: (f64, f64) = (-3.0, 3.0);
pub const HALFWIDTH_RANGE: (f64, f64) = (0.2, 1.0);
pub const AMPLITUDE_RANGE: (f64, f64) = (-0.5, 0.5);

#[derive(Debug, Clone)]
pub struct FieldSampler {
    rng: ChaCha8Rng,
}

fn bump_spec(center: f64, halfwidth: f64, amplitude: f64) -> SumTerm {
    SumTerm {
        spec: FieldSpec::Bump { center, halfwidth, amplitude },
        coef: 1.0,
    }
}

impl FieldSampler {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if lo == hi {
            lo
        } else {
            self.rng.gen_range(lo..hi)
        }
    }

    pub fn index(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        self.rng.gen_range(lo..=hi_inclusive)
    }

    /// Sum of 1 to 4 bumps with parameters drawn from the standard ranges.
    pub fn bump_sum_spec(&mut self) -> FieldSpec {
        let k = self.index(1, 4);
        let terms = (0..k)
            .map(|_| {
                let c = self.uniform(CENTER_RANGE.0, CENTER_RANGE.1);
                let w = self.uniform(HALFWIDTH_RANGE.0, HALFWIDTH_RANGE.1);
                let a = self.uniform(AMPLITUDE_RANGE.0, AMPLITUDE_RANGE.1);
                bump_spec(c, w, a)
            })
            .collect();
        FieldSpec::Sum { terms }
    }

    pub fn bump_sum(&mut self) -> Result<VectorField> {
        self.bump_sum_spec().build()
    }

    /// A single bump from the standard ranges.
    pub fn bump(&mut self) -> Result<VectorField> {
        let c = self.uniform(CENTER_RANGE.0, CENTER_RANGE.1);
        let w = self.uniform(HALFWIDTH_RANGE.0, HALFWIDTH_RANGE.1);
        let a = self.uniform(AMPLITUDE_RANGE.0, AMPLITUDE_RANGE.1);
        VectorField::bump(c, w, a)
    }

    /// A field vanishing at `a` and `b` with generically nonzero slope there:
    /// an antisymmetric bump pair straddling each endpoint, plus up to two
    /// bumps supported inside `(a, b)`.
    pub fn fixing_field_spec(&mut self, a: f64, b: f64) -> FieldSpec {
        let room = ((b - a) / 2.0).min(2.0);
        let mut terms = Vec::new();
        for p in [a, b] {
            let w = self.uniform(0.25, 0.45) * room;
            let d = self.uniform(0.2, 0.8) * w;
            let amp = self.uniform(AMPLITUDE_RANGE.0, AMPLITUDE_RANGE.1);
            // Profiles agree at p by symmetry, so the pair vanishes there.
            terms.push(bump_spec(p - d, w, amp));
            terms.push(bump_spec(p + d, w, -amp));
        }
        for _ in 0..self.index(0, 2) {
            let w = self.uniform(0.1, 0.4) * (b - a);
            let c = self.uniform(a + w, b - w);
            let amp = self.uniform(AMPLITUDE_RANGE.0, AMPLITUDE_RANGE.1);
            terms.push(bump_spec(c, w, amp));
        }
        FieldSpec::Sum { terms }
    }

    pub fn fixing_field(&mut self, a: f64, b: f64) -> Result<VectorField> {
        self.fixing_field_spec(a, b).build()
    }

    /// Two single bumps whose supports overlap.
    pub fn overlapping_pair(&mut self) -> Result<(VectorField, VectorField)> {
        let c1 = self.uniform(-1.5, 1.5);
        let w1 = self.uniform(HALFWIDTH_RANGE.0, HALFWIDTH_RANGE.1);
        let w2 = self.uniform(HALFWIDTH_RANGE.0, HALFWIDTH_RANGE.1);
        let gap = self.uniform(-0.9, 0.9) * (w1 + w2);
        let a1 = self.uniform(AMPLITUDE_RANGE.0, AMPLITUDE_RANGE.1);
        let a2 = self.uniform(AMPLITUDE_RANGE.0, AMPLITUDE_RANGE.1);
        Ok((VectorField::bump(c1, w1, a1)?, VectorField::bump(c1 + gap, w2, a2)?))
    }

    /// Trigonometric polynomial on the circle with modes `1..=degree`.
    pub fn trig_poly(&mut self, degree: usize, scale: f64) -> Result<VectorField> {
        let cos = (0..=degree).map(|k| if k == 0 { 0.0 } else { self.uniform(-scale, scale) }).collect();
        let sin = (0..=degree).map(|k| if k == 0 { 0.0 } else { self.uniform(-scale, scale) }).collect();
        VectorField::trig_poly(cos, sin)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Support;

    #[test]
    fn same_seed_same_fields() {
        let (mut a, mut b) = (FieldSampler::new(9), FieldSampler::new(9));
        for _ in 0..5 {
            assert_eq!(a.bump_sum_spec(), b.bump_sum_spec());
        }
        assert_ne!(FieldSampler::new(1).bump_sum_spec(), FieldSampler::new(2).bump_sum_spec());
    }

    #[test]
    fn bump_parameters_in_range() {
        let mut s = FieldSampler::new(3);
        for _ in 0..200 {
            let FieldSpec::Sum { terms } = s.bump_sum_spec() else { panic!() };
            assert!((1..=4).contains(&terms.len()));
            for t in terms {
                let FieldSpec::Bump { center, halfwidth, amplitude } = t.spec else { panic!() };
                assert!((-3.0..3.0).contains(&center));
                assert!((0.2..1.0).contains(&halfwidth));
                assert!((-0.5..0.5).contains(&amplitude));
            }
        }
    }

    #[test]
    fn fixing_fields_vanish_at_endpoints() {
        let mut s = FieldSampler::new(5);
        for _ in 0..50 {
            let (a, b) = (s.uniform(-2.0, 0.0), s.uniform(0.5, 3.0));
            let f = s.fixing_field(a, b).unwrap();
            assert!(f.value(a).abs() < 1e-15 && f.value(b).abs() < 1e-15);
            let Support::Interval(lo, hi) = f.support() else { panic!() };
            assert!(lo < a && hi > b);
        }
    }

    #[test]
    fn overlapping_pairs_overlap() {
        let mut s = FieldSampler::new(11);
        for _ in 0..50 {
            let (f1, f2) = s.overlapping_pair().unwrap();
            let (Support::Interval(a1, b1), Support::Interval(a2, b2)) = (f1.support(), f2.support()) else { panic!() };
            assert!(a1.max(a2) < b1.min(b2));
        }
    }
}
