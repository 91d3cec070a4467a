use proptest::prelude::*;

use pfconst_core::eigen::{dense_generalized_eig, SolverChoice};
use pfconst_core::harness::{compute_on_mesh, ConstantKind, Constraint, SolveOptions};
use pfconst_core::io::{read_matrix_market, write_matrix_market};
use pfconst_core::oracle::{exact_lambda0, exact_lambda1_3d, BoxBc};
use pfconst_core::sparse::LdlSymbolic;
use pfconst_core::{BoundaryLabel, Domain, Mesh, SparseSymMatrix};

fn labels_from_mask(dim: usize, mask: u8) -> Vec<BoundaryLabel> {
    BoundaryLabel::all(dim)
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, l)| *l)
        .collect()
}

fn constant(mesh: &Mesh, kind: ConstantKind, labels: &[BoundaryLabel]) -> f64 {
    let opts = SolveOptions::with_solver(SolverChoice::Dense);
    compute_on_mesh(mesh, "test", 0, kind, &Constraint::Labels(labels.to_vec()), &opts, None)
        .unwrap()
        .c
}

fn kind_strategy() -> impl Strategy<Value = ConstantKind> {
    prop_oneof![Just(ConstantKind::C0), Just(ConstantKind::C1), Just(ConstantKind::C2)]
}

fn renumbered(mesh: &Mesh, perm: &[usize], cell_order: &[usize]) -> Mesh {
    let mut nodes = vec![[0.0; 3]; mesh.num_nodes()];
    for (old, &new) in perm.iter().enumerate() {
        nodes[new] = mesh.nodes()[old];
    }
    let cells: Vec<usize> = cell_order
        .iter()
        .flat_map(|&c| mesh.cell(c).iter().map(|&v| perm[v]).collect::<Vec<_>>())
        .collect();
    Mesh::from_cells(mesh.dim(), nodes, cells).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn constants_do_not_depend_on_numbering(
        seed in any::<u64>(),
        domain in prop_oneof![Just(Domain::Square), Just(Domain::LShape), Just(Domain::Cube)],
        kind in kind_strategy(),
        mask in 0u8..64,
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mesh = domain.build(1).unwrap();
        let dim = mesh.dim();
        let labels = labels_from_mask(dim, mask & ((1 << (2 * dim)) - 1));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (0..mesh.num_nodes()).collect();
        perm.shuffle(&mut rng);
        let mut order: Vec<usize> = (0..mesh.num_cells()).collect();
        order.shuffle(&mut rng);
        let other = renumbered(&mesh, &perm, &order);
        let a = constant(&mesh, kind, &labels);
        let b = constant(&other, kind, &labels);
        prop_assert!((a - b).abs() <= 1e-10 * a, "{a} vs {b}");
    }

    #[test]
    fn constants_scale_with_the_domain(r in 0.25f64..4.0, kind in kind_strategy(), mask in 0u8..16) {
        let mesh = Domain::Square.build(2).unwrap();
        let labels = labels_from_mask(2, mask);
        let a = constant(&mesh, kind, &labels);
        let b = constant(&mesh.scaled(r), kind, &labels);
        prop_assert!((b - r * a).abs() <= 1e-10 * r * a, "{} vs {}", b, r * a);
    }

    #[test]
    fn rotated_nedelec_equals_raviart_thomas_in_2d(
        domain in prop_oneof![Just(Domain::Square), Just(Domain::LShape)],
        mask in 0u8..16,
    ) {
        let mesh = domain.build(1).unwrap();
        let labels = labels_from_mask(2, mask);
        let n = constant(&mesh, ConstantKind::C1, &labels);
        let rt = constant(&mesh, ConstantKind::C2, &labels);
        prop_assert!((n - rt).abs() <= 1e-10 * n, "{n} vs {rt}");
    }

    #[test]
    fn discrete_friedrichs_constant_is_monotone(sub in 1u8..64, extra in 0u8..64) {
        let mesh = Domain::Cube.build(1).unwrap();
        let small = labels_from_mask(3, sub);
        let large = labels_from_mask(3, sub | extra);
        let c_small = constant(&mesh, ConstantKind::C0, &small);
        let c_large = constant(&mesh, ConstantKind::C0, &large);
        prop_assert!(c_large <= c_small * (1.0 + 1e-12));
    }

    #[test]
    fn oracle_is_invariant_under_box_symmetries(dim in 1usize..=3, mask in 0u8..64) {
        let bc = BoxBc::new(dim, mask & ((1 << (2 * dim)) - 1)).unwrap();
        let l0 = exact_lambda0(bc);
        for image in bc.orbit() {
            prop_assert_eq!(exact_lambda0(image), l0);
            if dim == 3 {
                prop_assert_eq!(exact_lambda1_3d(image).unwrap(), exact_lambda1_3d(bc).unwrap());
            }
        }
        if dim == 3 {
            prop_assert_eq!(exact_lambda1_3d(bc.complement()).unwrap(), exact_lambda1_3d(bc).unwrap());
        }
    }

    #[test]
    fn oracle_lambda0_is_monotone(dim in 1usize..=3, sub in 1u8..64, extra in 0u8..64) {
        let full = (1u8 << (2 * dim)) - 1;
        let sub = sub & full;
        prop_assume!(sub != 0);
        let small = BoxBc::new(dim, sub).unwrap();
        let large = BoxBc::new(dim, sub | (extra & full)).unwrap();
        prop_assert!(small.is_subset_of(large));
        prop_assert!(exact_lambda0(small).lambda_sq() <= exact_lambda0(large).lambda_sq());
    }

    #[test]
    fn oracle_lambda0_matches_separable_modes_in_2d(mask in 0u8..16) {
        // Per axis: sin(k pi x) for Dirichlet ends (2k half-units), cos(k pi x)
        // for Neumann ends (2k, k >= 0), and odd half-units for mixed ends.
        let bc = BoxBc::new(2, mask).unwrap();
        let allowed = |a: usize, k: u32| match (bc.contains(a, false), bc.contains(a, true)) {
            (true, true) => k % 2 == 0 && k > 0,
            (false, false) => k % 2 == 0,
            _ => k % 2 == 1,
        };
        let mut best = u32::MAX;
        for n in 0..8u32 {
            for m in 0..8u32 {
                if allowed(0, n) && allowed(1, m) && (n, m) != (0, 0) {
                    best = best.min(n * n + m * m);
                }
            }
        }
        prop_assert_eq!(exact_lambda0(bc).four_q, best);
    }

    #[test]
    fn maxwell_in_2d_approaches_laplace_with_swapped_sides(mask in 0u8..16) {
        let mesh = Domain::Square.build(3).unwrap();
        let tau = labels_from_mask(2, mask);
        let nu: Vec<BoundaryLabel> = BoundaryLabel::all(2).iter().copied().filter(|l| !tau.contains(l)).collect();
        let exact = exact_lambda0(BoxBc::from_labels(2, &tau).unwrap()).constant();
        let c1 = constant(&mesh, ConstantKind::C1, &nu);
        prop_assert!((c1 - exact).abs() < 1e-2 * exact, "{c1} vs {exact}");
    }

    #[test]
    fn ldl_inertia_counts_negative_eigenvalues(seed in any::<u64>(), shift in 0.05f64..3.0) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = 40;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + rng.gen::<f64>()));
            for _ in 0..3 {
                let j = rng.gen_range(0..n);
                if j < i {
                    t.push((i, j, rng.gen_range(-1.0..1.0)));
                }
            }
        }
        let a = SparseSymMatrix::from_lower_triplets(n, &t);
        let shifted = SparseSymMatrix::linear_combination(1.0, &a, -shift, &SparseSymMatrix::identity(n)).unwrap();
        let eig = dense_generalized_eig(&a, &SparseSymMatrix::identity(n)).unwrap();
        prop_assume!(eig.iter().all(|e| (e - shift).abs() > 1e-6));
        let expected = eig.iter().filter(|&&e| e < shift).count();
        let f = LdlSymbolic::analyze(&shifted).factor(&shifted).unwrap();
        prop_assert_eq!(f.inertia().negative, expected);
    }

    #[test]
    fn matrix_market_roundtrip(entries in proptest::collection::vec((0usize..20, 0usize..20, -1e3f64..1e3), 1..60)) {
        let t: Vec<_> = entries.iter().map(|&(i, j, v)| (i.max(j), i.min(j), v)).collect();
        let a = SparseSymMatrix::from_lower_triplets(20, &t);
        let mut buf = Vec::new();
        write_matrix_market(&mut buf, &a).unwrap();
        let b = read_matrix_market(buf.as_slice()).unwrap();
        for (i, j, v) in a.lower_entries() {
            prop_assert_eq!(b.get(i, j), v);
        }
        prop_assert_eq!(a.nnz_lower(), b.nnz_lower());
    }
}
