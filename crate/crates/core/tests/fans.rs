mod common;

use common::fixtures::fixture;
use num_bigint::BigInt;
use num_traits::Zero;
use tropicorr::exactla::Rat;
use tropicorr::fanmodel::*;
use tropicorr::stacky::*;

fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

#[test]
fn crossing_gets_a_vertex_on_each_edge() {
    let x = fixture("xconfig").curve;
    let r = gamma_tr(&x).unwrap();
    let one = Rat::from_integer(1.into());
    let at_cross: Vec<_> = r.curve.finite_vertices.iter().filter(|v| r.h[*v] == vec![one.clone(), one.clone()]).collect();
    assert_eq!(at_cross.len(), 2);
    assert_eq!(r.curve.finite_vertices.len(), 6);
    assert_eq!(gamma_tr(&r).unwrap().curve.finite_vertices.len(), 6);
    let fan = fan_model(&x).unwrap();
    let i = fan.ray_index(&ints(&[1, 1, 1])).unwrap();
    assert_eq!(fan.ray_vertices[i].len(), 2);
    let (nodes, edges) = fan.component_adjacency();
    assert_eq!(nodes.len(), 5);
    assert_eq!(edges.iter().filter(|(a, b)| *a == i || *b == i).count(), 4);
}

#[test]
fn unrefined_curve_is_rejected_by_the_direct_constructor() {
    let x = fixture("xconfig").curve;
    assert!(matches!(FanModel::for_refined_curve(&x), Err(FanError::NotRefined)));
}

#[test]
fn reduction_exponents_balance() {
    for name in ["line2pts", "dblline", "triangle", "xconfig"] {
        let p = fixture(name).curve;
        for (v, rows) in all_reduction_exponents(&p).unwrap() {
            let mut sum = vec![BigInt::zero(); p.lattice_rank];
            for r in rows {
                for (s, x) in sum.iter_mut().zip(&r.exponent) {
                    *s += x;
                }
            }
            assert!(sum.iter().all(Zero::is_zero), "{name}:{v}");
        }
    }
}

#[test]
fn star_fan_of_vertex_ray_matches_local_fan() {
    let p = gamma_tr(&fixture("xconfig").curve).unwrap();
    let fan = fan_model(&p).unwrap();
    for (i, vs) in fan.ray_vertices.iter().enumerate() {
        if fan.eta[i] || vs.is_empty() {
            continue;
        }
        let mut union: Vec<Vec<BigInt>> = vs.iter().flat_map(|v| vertex_star(&p, v).unwrap()).collect();
        union.sort();
        union.dedup();
        assert_eq!(fan.star_fan(i).unwrap(), union);
    }
}

#[test]
fn doubled_line_bounded_cone_has_order_two() {
    let p = gamma_tr(&fixture("dblline").curve).unwrap();
    let s = stacky_data(&p, &ToricModelConfig::new(1).unwrap()).unwrap();
    assert!(compatible(&s));
    let bounded: Vec<_> = s.cones.iter().filter(|c| c.rays.iter().all(|&r| !s.fan.eta[r])).collect();
    assert_eq!(bounded.len(), 2);
    assert!(bounded.iter().all(|c| c.stabilizer_order == BigInt::from(2)));
    assert!(!is_dm(&p, 2).unwrap());
    assert!(is_dm(&p, 3).unwrap());
    let node = node_stack(&p).unwrap();
    assert!(node.edges.iter().all(|(_, r)| *r == BigInt::from(1)));
}

#[test]
fn line_is_schematic() {
    let p = gamma_tr(&fixture("line2pts").curve).unwrap();
    let s = stacky_data(&p, &ToricModelConfig::new(1).unwrap()).unwrap();
    assert!(s.all_orders().all(|o| *o == BigInt::from(1)));
    assert!(is_dm(&p, 2).unwrap());
}

#[test]
fn non_reduced_base_change_is_refused() {
    let p = gamma_tr(&fixture("xconfig").curve).unwrap();
    let r = ramification(&p, &ToricModelConfig::new(1).unwrap());
    assert!(r.reduced);
    assert!(ToricModelConfig::new(0).is_err());
}
