//! Metric quantities of a single, possibly non-orthogonal, hexahedral cell.
//!
//! # Labeling
//!
//! Vertices follow the VTK hexahedron order. Writing a vertex by its corner
//! bits `(i, j, k)` along the three local directions:
//!
//! | vertex | 0 | 1 | 2 | 3 | 4 | 5 | 6 | 7 |
//! |--------|---|---|---|---|---|---|---|---|
//! | i j k  |000|100|110|010|001|101|111|011|
//!
//! Edges `4μ..4μ+3` run along local direction `μ` from the corner with bit
//! `μ = 0` (tail) to bit `μ = 1` (head); see [`EDGE_TABLE`]. Within a group
//! the edge offset is `a + 2b`, where `a` and `b` are the corner bits of the
//! directions `μ+1` and `μ+2` (cyclic).
//!
//! Face `2μ` is the face with corner bit `μ = 0`, face `2μ + 1` the one with
//! bit `μ = 1`, so node vector `b_μ` points from face `2μ` to face `2μ + 1`.
//! Face vectors are stored outward; [`face_sign`] gives the orientation of the
//! outward vector relative to `b_μ`.

use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec3};
use crate::scalar::Real;

/// `(tail, head)` vertex pairs; edge `ν` belongs to direction group `ν / 4`.
pub const EDGE_TABLE: [(usize, usize); 12] = [
    (0, 1),
    (3, 2),
    (4, 5),
    (7, 6),
    (0, 3),
    (4, 7),
    (1, 2),
    (5, 6),
    (0, 4),
    (1, 5),
    (3, 7),
    (2, 6),
];

/// Face vertices in cyclic order, counter-clockwise seen from outside.
pub const FACE_VERTICES: [[usize; 4]; 6] = [
    [0, 4, 7, 3],
    [1, 2, 6, 5],
    [0, 1, 5, 4],
    [3, 7, 6, 2],
    [0, 3, 2, 1],
    [4, 5, 6, 7],
];

/// Default upper bound on the node-vector condition number.
pub const DEFAULT_CONDITION_LIMIT: f64 = 1e8;

/// Local direction normal to face `face`.
#[inline]
pub const fn face_axis(face: usize) -> usize {
    face / 2
}

/// `+1` when the outward face vector points along `b_μ`, `-1` otherwise.
#[inline]
pub fn face_sign<S: Real>(face: usize) -> S {
    if face % 2 == 1 {
        S::one()
    } else {
        -S::one()
    }
}

/// Face opposite to `face` within the same cell.
#[inline]
pub const fn opposite_face(face: usize) -> usize {
    face ^ 1
}

/// Edge vectors `e_ν = head − tail` per [`EDGE_TABLE`].
pub fn compute_edge_vectors<S: Real>(vertices: &[Vec3<S>; 8]) -> Result<[Vec3<S>; 12]> {
    let scale = vertices.iter().map(|v| v.max_abs()).fold(S::zero(), S::max);
    for (a, va) in vertices.iter().enumerate() {
        if !va.is_finite() {
            return Err(Error::degenerate(usize::MAX, format!("vertex {a} is not finite")));
        }
        for (b, vb) in vertices.iter().enumerate().skip(a + 1) {
            if (*va - *vb).max_abs() <= scale * S::epsilon() {
                return Err(Error::degenerate(usize::MAX, format!("vertices {a} and {b} coincide")));
            }
        }
    }
    Ok(EDGE_TABLE.map(|(tail, head)| vertices[head] - vertices[tail]))
}

/// `b_μ = ¼ Σ_ν e_{4μ+ν}`.
pub fn compute_node_vectors<S: Real>(edges: &[Vec3<S>; 12]) -> [Vec3<S>; 3] {
    let quarter = S::lit(0.25);
    std::array::from_fn(|mu| (edges[4 * mu] + edges[4 * mu + 1] + edges[4 * mu + 2] + edges[4 * mu + 3]) * quarter)
}

/// Outward face vectors from the cross product of the face's two edge sums.
///
/// For face `(μ, s)` the edge sums run over the direction-`μ+1` and
/// direction-`μ+2` edges lying on the face; their cross product over four is
/// the vector area of the (possibly warped) quadrilateral.
pub fn compute_face_vectors<S: Real>(edges: &[Vec3<S>; 12]) -> Result<[Vec3<S>; 6]> {
    let quarter = S::lit(0.25);
    let mut faces = [Vec3::zero(); 6];
    let scale = edges.iter().map(|e| e.norm_squared()).fold(S::zero(), S::max);
    for (face, out) in faces.iter_mut().enumerate() {
        let mu = face_axis(face);
        let side = face % 2;
        let g1 = (mu + 1) % 3;
        let g2 = (mu + 2) % 3;
        let e1 = edges[4 * g1 + 2 * side] + edges[4 * g1 + 1 + 2 * side];
        let e2 = edges[4 * g2 + side] + edges[4 * g2 + side + 2];
        let f = e1.cross(&e2) * (quarter * face_sign::<S>(face));
        if f.norm_squared() <= scale * scale * S::epsilon() * S::epsilon() {
            return Err(Error::degenerate(usize::MAX, format!("face {face} has zero area")));
        }
        *out = f;
    }
    Ok(faces)
}

/// Vertex-average centre of each face.
pub fn compute_face_centers<S: Real>(vertices: &[Vec3<S>; 8]) -> [Vec3<S>; 6] {
    let quarter = S::lit(0.25);
    FACE_VERTICES.map(|q| (vertices[q[0]] + vertices[q[1]] + vertices[q[2]] + vertices[q[3]]) * quarter)
}

/// Vertex average of the cell; the node location.
pub fn compute_centroid<S: Real>(vertices: &[Vec3<S>; 8]) -> Vec3<S> {
    vertices.iter().fold(Vec3::zero(), |acc, v| acc + *v) * S::lit(0.125)
}

/// Divergence-theorem volume `⅓ Σ_ι (c_ι − x̄)·f_ι`, exact for trilinear cells.
pub fn compute_volume<S: Real>(vertices: &[Vec3<S>; 8], faces: &[Vec3<S>; 6]) -> S {
    let centroid = compute_centroid(vertices);
    let centers = compute_face_centers(vertices);
    let sum: S = centers.iter().zip(faces).map(|(c, f)| (*c - centroid).dot(f)).sum();
    sum / S::lit(3.0)
}

/// `γ = ((β)ᵀ)⁻¹` where `β` holds the node vectors as columns, together with
/// the Frobenius condition number of `β`.
pub fn compute_gamma<S: Real>(node_vectors: &[Vec3<S>; 3]) -> Option<(Mat3<S>, S)> {
    let beta = Mat3::from_columns(node_vectors);
    let beta_inv = beta.inverse()?;
    let condition = beta.frobenius() * beta_inv.frobenius();
    Some((beta_inv.transpose(), condition))
}

/// `s_ι^μ = f_ι^ν γ_ν^μ`.
pub fn compute_s_coeffs<S: Real>(faces: &[Vec3<S>; 6], gamma: &Mat3<S>) -> [Vec3<S>; 6] {
    faces.map(|f| gamma.tr_mul_vec(&f))
}

/// Precomputed geometry of one hexahedral cell.
#[derive(Clone, Debug)]
pub struct HexCell<S> {
    pub vertex_ids: [usize; 8],
    pub edge_vectors: [Vec3<S>; 12],
    pub node_vectors: [Vec3<S>; 3],
    /// Outward face vectors; magnitude is the face's vector area.
    pub face_vectors: [Vec3<S>; 6],
    pub face_centers: [Vec3<S>; 6],
    pub centroid: Vec3<S>,
    pub volume: S,
    pub gamma: Mat3<S>,
    pub condition: S,
    pub s_coeffs: [Vec3<S>; 6],
    /// `2 σ_ι s_ι^{[ι/2]}`: coefficient of the port value in the face's normal flux.
    pub normal_coeffs: [S; 6],
    pub face_areas: [S; 6],
    /// Shortest node-vector length, used as the cell size in CFL estimates.
    pub spacing: S,
}

impl<S: Real> HexCell<S> {
    /// Builds and validates the geometry of cell `index`.
    pub fn new(index: usize, vertex_ids: [usize; 8], vertices: &[Vec3<S>; 8]) -> Result<Self> {
        Self::with_condition_limit(index, vertex_ids, vertices, S::lit(DEFAULT_CONDITION_LIMIT))
    }

    pub fn with_condition_limit(
        index: usize,
        vertex_ids: [usize; 8],
        vertices: &[Vec3<S>; 8],
        condition_limit: S,
    ) -> Result<Self> {
        let tag = |e: Error| match e {
            Error::DegenerateCell { reason, .. } => Error::DegenerateCell { cell: index, reason },
            other => other,
        };
        let edge_vectors = compute_edge_vectors(vertices).map_err(tag)?;
        let node_vectors = compute_node_vectors(&edge_vectors);
        let face_vectors = compute_face_vectors(&edge_vectors).map_err(tag)?;
        let volume = compute_volume(vertices, &face_vectors);
        if !(volume > S::min_positive_value()) {
            return Err(Error::InvertedCell { cell: index, volume: volume.to_f64_lossy() });
        }
        let (gamma, condition) = compute_gamma(&node_vectors)
            .ok_or_else(|| Error::degenerate(index, "node vectors are linearly dependent"))?;
        if !(condition <= condition_limit) {
            return Err(Error::NearDegenerateCell {
                cell: index,
                condition: condition.to_f64_lossy(),
                limit: condition_limit.to_f64_lossy(),
            });
        }
        let s_coeffs = compute_s_coeffs(&face_vectors, &gamma);
        let normal_coeffs: [S; 6] =
            std::array::from_fn(|f| S::two() * face_sign::<S>(f) * s_coeffs[f][face_axis(f)]);
        if let Some(f) = normal_coeffs.iter().position(|a| !(*a > S::zero())) {
            return Err(Error::degenerate(index, format!("face {f} is not visible from the node (skew too large)")));
        }
        let face_areas = face_vectors.map(|f| f.norm());
        let spacing = node_vectors.iter().map(|b| b.norm()).fold(S::infinity(), S::min);
        Ok(HexCell {
            vertex_ids,
            edge_vectors,
            node_vectors,
            face_vectors,
            face_centers: compute_face_centers(vertices),
            centroid: compute_centroid(vertices),
            volume,
            gamma,
            condition,
            s_coeffs,
            normal_coeffs,
            face_areas,
            spacing,
        })
    }

    /// `|Σ_ι f_ι| / Σ_ι |f_ι|`.
    pub fn closure_defect(&self) -> S {
        let sum = self.face_vectors.iter().fold(Vec3::zero(), |a, f| a + *f);
        sum.norm() / self.face_areas.iter().copied().sum::<S>()
    }

    /// Largest entry of `γ βᵀ − I`.
    pub fn gamma_defect(&self) -> S {
        let beta_t = Mat3::from_columns(&self.node_vectors).transpose();
        self.gamma.mul_mat(&beta_t).identity_defect()
    }

    /// Recovers a physical vector from its node-basis components `⟨b_μ, a⟩`.
    #[inline]
    pub fn from_node_components(&self, components: &Vec3<S>) -> Vec3<S> {
        self.gamma.mul_vec(components)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_cube(scale: f64) -> [Vec3<f64>; 8] {
        let bits = [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]];
        bits.map(|b| Vec3::new(b[0] as f64, b[1] as f64, b[2] as f64) * scale)
    }

    #[test]
    fn edge_groups_of_unit_cube() {
        let e = compute_edge_vectors(&unit_cube(1.0)).unwrap();
        for (nu, v) in e.iter().enumerate() {
            assert_eq!(*v, Vec3::unit(nu / 4), "edge {nu}");
        }
        let e2 = compute_edge_vectors(&unit_cube(2.0)).unwrap();
        for (a, b) in e.iter().zip(&e2) {
            assert_eq!(*a * 2.0, *b);
        }
    }

    #[test]
    fn coincident_vertices_rejected() {
        let mut v = unit_cube(1.0);
        v[6] = v[5];
        assert!(matches!(compute_edge_vectors(&v), Err(Error::DegenerateCell { .. })));
    }

    #[test]
    fn parallelepiped_node_vectors_and_volume() {
        let (a, b, c) = (Vec3::new(2.0, 0.1, 0.0), Vec3::new(0.3, 1.5, 0.2), Vec3::new(-0.1, 0.4, 0.9));
        let o = Vec3::new(1.0, -2.0, 0.5);
        let v = [o, o + a, o + a + b, o + b, o + c, o + a + c, o + a + b + c, o + b + c];
        let cell = HexCell::new(0, [0; 8], &v).unwrap();
        for (got, want) in cell.node_vectors.iter().zip([a, b, c]) {
            assert!((*got - want).max_abs() < 1e-15);
        }
        let det: f64 = Mat3::from_columns(&[a, b, c]).det();
        assert!((cell.volume - det.abs()).abs() < 1e-14 * det.abs());
    }

    #[test]
    fn unit_cube_faces_and_metric() {
        let cell = HexCell::new(0, [0; 8], &unit_cube(1.0)).unwrap();
        for f in 0..6 {
            let expect = Vec3::unit(face_axis(f)) * face_sign::<f64>(f);
            assert_eq!(cell.face_vectors[f], expect);
            assert_eq!(cell.s_coeffs[f], expect);
            assert_eq!(cell.normal_coeffs[f], 2.0);
        }
        // the +x face (local face 1) has s = (1, 0, 0)
        assert_eq!(cell.s_coeffs[1], Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(cell.gamma, Mat3::identity());
        assert_eq!(cell.volume, 1.0);
    }

    #[test]
    fn gamma_of_doubled_basis_is_half_identity() {
        let b = [Vec3::unit(0) * 2.0, Vec3::unit(1) * 2.0, Vec3::unit(2) * 2.0];
        let (g, cond): (Mat3<f64>, f64) = compute_gamma(&b).unwrap();
        assert_eq!(g, Mat3([[0.5, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.5]]));
        assert!((cond - 3.0).abs() < 1e-15);
    }

    #[test]
    fn near_degenerate_cell_reported() {
        let mut v = unit_cube(1.0);
        for i in [4, 5, 6, 7] {
            v[i][2] = 1e-9;
        }
        assert!(matches!(HexCell::new(3, [0; 8], &v), Err(Error::NearDegenerateCell { cell: 3, .. })));
    }

    #[test]
    fn mirrored_cell_is_inverted() {
        let v = unit_cube(1.0).map(|p| Vec3::new(-p[0], p[1], p[2]));
        assert!(matches!(HexCell::new(7, [0; 8], &v), Err(Error::InvertedCell { cell: 7, .. })));
    }

    #[test]
    fn homogeneity_under_scaling() {
        let lambda = 3.0;
        let a = HexCell::new(0, [0; 8], &unit_cube(1.0)).unwrap();
        let b = HexCell::new(0, [0; 8], &unit_cube(lambda)).unwrap();
        for f in 0..6 {
            assert!((b.face_vectors[f] - a.face_vectors[f] * (lambda * lambda)).max_abs() < 1e-14);
            assert!((b.s_coeffs[f] - a.s_coeffs[f] * lambda).max_abs() < 1e-14);
        }
        assert!((b.volume - lambda.powi(3)).abs() < 1e-13);
    }

    #[test]
    fn works_in_single_precision() {
        let v = unit_cube(1.0).map(|p| Vec3::<f32>::from_f64(p.0));
        let cell = HexCell::<f32>::new(0, [0; 8], &v).unwrap();
        assert_eq!(cell.volume, 1.0f32);
        assert!(cell.closure_defect() < 1e-6);
    }
}
