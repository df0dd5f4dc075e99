use crate::table::{permutation_group, Elem, FiniteGroup};
use crate::{GroupError, Result};

/// A finite group `Γ` generated by embedded copies of `A` and `B`, with
/// `Γ / Γ' ≅ A × B` where `Γ'` is the normal closure of `[A, B]`.
///
/// Abstract `A` and `B` elements are positions in the marking lists; `A × B`
/// ids are `a * |B| + b`.
#[derive(Clone, Debug)]
pub struct MarkedGamma {
    gamma: FiniteGroup,
    a_group: FiniteGroup,
    b_group: FiniteGroup,
    ab: FiniteGroup,
    a_images: Vec<Elem>,
    b_images: Vec<Elem>,
    theta: Vec<Elem>,
    gamma_prime: Vec<Elem>,
    prime_index: Vec<Option<u32>>,
    word_length: Vec<u32>,
    diameter: u32,
}

impl MarkedGamma {
    /// Validates the marking and derives `Γ'`, `θ` and the word metric.
    pub fn new(gamma: FiniteGroup, a_images: Vec<Elem>, b_images: Vec<Elem>) -> Result<Self> {
        let a_group = induced(&gamma, &a_images, "A")?;
        let b_group = induced(&gamma, &b_images, "B")?;
        let ab = FiniteGroup::direct_product(&a_group, &b_group);
        let nb = b_images.len();

        let mut gens: Vec<Elem> = a_images.iter().chain(b_images.iter()).copied().collect();
        gens.retain(|&g| g != gamma.identity());
        if gamma.subgroup_closure(&gens).len() != gamma.order() {
            return Err(GroupError::Marking(
                "A and B do not generate the group".into(),
            ));
        }

        let commutators: Vec<Elem> = a_images
            .iter()
            .flat_map(|&a| b_images.iter().map(move |&b| (a, b)))
            .map(|(a, b)| gamma.commutator(a, b))
            .collect();
        let gamma_prime = gamma.normal_closure(&commutators);
        if gamma.order() != ab.order() * gamma_prime.len() {
            return Err(GroupError::Marking(format!(
                "quotient by the derived part has order {} instead of {}",
                gamma.order() / gamma_prime.len(),
                ab.order()
            )));
        }

        // Label each coset of Γ' by the unique a·b it contains.
        let mut theta = vec![Elem::MAX; gamma.order()];
        for (ia, &a) in a_images.iter().enumerate() {
            for (ib, &b) in b_images.iter().enumerate() {
                let label = (ia * nb + ib) as Elem;
                let s = gamma.mul(a, b);
                for &h in &gamma_prime {
                    let g = gamma.mul(h, s);
                    if theta[g as usize] != Elem::MAX {
                        return Err(GroupError::Marking(
                            "A·B meets a coset of the derived part twice".into(),
                        ));
                    }
                    theta[g as usize] = label;
                }
            }
        }
        for x in 0..gamma.order() as Elem {
            for y in 0..gamma.order() as Elem {
                if theta[gamma.mul(x, y) as usize] != ab.mul(theta[x as usize], theta[y as usize]) {
                    return Err(GroupError::Marking(
                        "projection to A×B is not a homomorphism".into(),
                    ));
                }
            }
        }

        let mut prime_index = vec![None; gamma.order()];
        for (i, &h) in gamma_prime.iter().enumerate() {
            prime_index[h as usize] = Some(i as u32);
        }
        let word_length = gamma.word_lengths(&gens)?;
        let diameter = word_length.iter().copied().max().unwrap_or(0);
        Ok(Self {
            gamma,
            a_group,
            b_group,
            ab,
            a_images,
            b_images,
            theta,
            gamma_prime,
            prime_index,
            word_length,
            diameter,
        })
    }

    /// `Γ_0 = A × B` marked by its two factors; its derived part is trivial.
    pub fn abelian_base(a_order: usize, b_order: usize) -> Result<Self> {
        let ab = FiniteGroup::direct_product(
            &FiniteGroup::cyclic(a_order),
            &FiniteGroup::cyclic(b_order),
        );
        let a_images = (0..a_order).map(|i| (i * b_order) as Elem).collect();
        let b_images = (0..b_order).map(|j| j as Elem).collect();
        Self::new(ab, a_images, b_images)
    }

    pub fn gamma(&self) -> &FiniteGroup {
        &self.gamma
    }

    pub fn a_group(&self) -> &FiniteGroup {
        &self.a_group
    }

    pub fn b_group(&self) -> &FiniteGroup {
        &self.b_group
    }

    /// `A × B`, the target of `θ`.
    pub fn ab(&self) -> &FiniteGroup {
        &self.ab
    }

    pub fn q(&self) -> usize {
        self.ab.order()
    }

    pub fn a_images(&self) -> &[Elem] {
        &self.a_images
    }

    pub fn b_images(&self) -> &[Elem] {
        &self.b_images
    }

    /// Embedded image of the abstract `A` element `a`.
    pub fn a_elem(&self, a: usize) -> Elem {
        self.a_images[a]
    }

    pub fn b_elem(&self, b: usize) -> Elem {
        self.b_images[b]
    }

    pub fn theta(&self, g: Elem) -> Elem {
        self.theta[g as usize]
    }

    /// Abstract `A` component of `θ(g)`.
    pub fn theta_a_index(&self, g: Elem) -> usize {
        self.theta[g as usize] as usize / self.b_images.len()
    }

    pub fn theta_b_index(&self, g: Elem) -> usize {
        self.theta[g as usize] as usize % self.b_images.len()
    }

    pub fn theta_a(&self, g: Elem) -> Elem {
        self.a_images[self.theta_a_index(g)]
    }

    pub fn theta_b(&self, g: Elem) -> Elem {
        self.b_images[self.theta_b_index(g)]
    }

    /// `g · (θᴬ(g) θᴮ(g))⁻¹`, an element of `Γ'`.
    pub fn derived_part(&self, g: Elem) -> Elem {
        let s = self.gamma.mul(self.theta_a(g), self.theta_b(g));
        self.gamma.mul(g, self.gamma.inv(s))
    }

    /// Sorted ids of `Γ'`.
    pub fn gamma_prime(&self) -> &[Elem] {
        &self.gamma_prime
    }

    pub fn gamma_prime_order(&self) -> usize {
        self.gamma_prime.len()
    }

    /// Position of `g` in `gamma_prime()`, if it lies there.
    pub fn prime_index(&self, g: Elem) -> Option<u32> {
        self.prime_index[g as usize]
    }

    /// `|g|` in the word metric of `A ∪ B`.
    pub fn word_length(&self, g: Elem) -> u32 {
        self.word_length[g as usize]
    }

    pub fn diameter(&self) -> u32 {
        self.diameter
    }
}

fn induced(gamma: &FiniteGroup, images: &[Elem], name: &str) -> Result<FiniteGroup> {
    if images.first() != Some(&gamma.identity()) {
        return Err(GroupError::Marking(format!(
            "{name} marking must start with the identity"
        )));
    }
    let mut sorted = images.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != images.len() || images.iter().any(|&x| x as usize >= gamma.order()) {
        return Err(GroupError::Marking(format!(
            "{name} marking has repeated or invalid ids"
        )));
    }
    if !gamma.is_subgroup(images) {
        return Err(GroupError::Marking(format!(
            "{name} marking is not a subgroup"
        )));
    }
    let (group, _) = gamma.restrict(images)?;
    Ok(group)
}

/// Subgroup of `(ℤ/2 × ℤ/3) × H` generated by `((a,e),x)` and `((e,b),y)`.
///
/// Its projection to `ℤ/2 × ℤ/3` has kernel equal to the derived part, which is
/// the normal closure of `[x, y]` inside `H`.
pub fn fiber_product_gamma(h: &FiniteGroup, x: Elem, y: Elem) -> Result<MarkedGamma> {
    if h.element_order(x) != 2 || h.element_order(y) != 3 {
        return Err(GroupError::Marking(
            "x must have order 2 and y order 3".into(),
        ));
    }
    if h.subgroup_closure(&[x, y]).len() != h.order() {
        return Err(GroupError::Marking("x and y do not generate H".into()));
    }
    let ab = FiniteGroup::direct_product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(3));
    let ambient = FiniteGroup::direct_product(&ab, h);
    let n = h.order() as Elem;
    let lift = |abid: Elem, g: Elem| abid * n + g;
    let gx = lift(3, x);
    let gy = lift(1, y);
    let sub = ambient.subgroup_closure(&[gx, gy]);
    let (gamma, ambient_ids) = ambient.restrict(&sub)?;
    let local = |g: Elem| {
        ambient_ids
            .binary_search(&g)
            .expect("generator in subgroup") as Elem
    };
    let a_images = vec![gamma.identity(), local(gx)];
    let b_images = vec![gamma.identity(), local(gy), local(ambient.mul(gy, gy))];
    MarkedGamma::new(gamma, a_images, b_images)
}

/// `S_3` from `(12)` and `(123)`; returns the group and the ids of those two.
pub fn symmetric3() -> (FiniteGroup, Elem, Elem) {
    let x = vec![1, 0, 2];
    let y = vec![1, 2, 0];
    permutation_pair(x, y)
}

/// `A_5` from `(12)(34)` and `(135)`.
pub fn alternating5() -> (FiniteGroup, Elem, Elem) {
    let x = vec![1, 0, 3, 2, 4];
    let y = vec![2, 1, 4, 3, 0];
    permutation_pair(x, y)
}

fn permutation_pair(x: Vec<usize>, y: Vec<usize>) -> (FiniteGroup, Elem, Elem) {
    let (g, elems) = permutation_group(&[x.clone(), y.clone()]).expect("valid permutations");
    let id = |p: &Vec<usize>| elems.iter().position(|e| e == p).unwrap() as Elem;
    (g.clone(), id(&x), id(&y))
}

/// Fiber product over `S_3`: order 18, derived part of order 3.
pub fn s3_fiber() -> MarkedGamma {
    let (h, x, y) = symmetric3();
    fiber_product_gamma(&h, x, y).expect("S3 marking is valid")
}

/// Fiber product over `A_5`: order 360, derived part of order 60.
pub fn a5_fiber() -> MarkedGamma {
    let (h, x, y) = alternating5();
    fiber_product_gamma(&h, x, y).expect("A5 marking is valid")
}

/// Smallest and largest ratio `ln|Γ'| / l` over groups with nontrivial derived part.
pub fn derived_log_ratio_band(groups: &[&MarkedGamma]) -> Option<(f64, f64)> {
    let ratios: Vec<f64> = groups
        .iter()
        .filter(|g| g.gamma_prime_order() > 1 && g.diameter() > 0)
        .map(|g| (g.gamma_prime_order() as f64).ln() / g.diameter() as f64)
        .collect();
    if ratios.is_empty() {
        return None;
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some((lo, hi))
}
