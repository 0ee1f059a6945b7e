use std::ffi::CStr;
use std::ptr;

use sbm_vips_ffi::*;

fn last_error() -> String {
    let p = sbm_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn graph(n: usize, k: usize, p: f64, q: f64) -> *mut SbmGraph {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { sbm_graph_generate(n, k, p, q, 3, &mut g) }, SbmStatus::Ok);
    g
}

#[test]
fn vips_round_trip() {
    let g = graph(400, 2, 0.2, 0.02);
    unsafe {
        assert_eq!(sbm_graph_node_count(g), 400);
        assert!(sbm_graph_edge_count(g) > 0);
        let opts = sbm_vips_options_default(0.2, 0.02);
        let mut r = ptr::null_mut();
        assert_eq!(sbm_run_vips(g, &opts, 1, 2, &mut r), SbmStatus::Ok);
        assert!(sbm_result_nmi(r) > 0.99);
        assert!(sbm_result_l1_error(r) < 1.0);
        assert!(sbm_result_converged(r));
        assert!(sbm_result_iterations(r) >= 1);

        let mut u = vec![0.0; 400];
        assert_eq!(sbm_result_membership(r, u.as_mut_ptr(), 400), SbmStatus::Ok);
        let mut labels = vec![0u32; 400];
        assert_eq!(sbm_result_labels(r, labels.as_mut_ptr(), 400), SbmStatus::Ok);
        for (x, l) in u.iter().zip(&labels) {
            assert_eq!(*l, u32::from(*x >= 0.5));
        }
        let (mut p, mut q) = (0.0, 0.0);
        assert_eq!(sbm_result_params(r, &mut p, &mut q), SbmStatus::Ok);
        assert_eq!((p, q), (0.2, 0.02));
        sbm_result_free(r);
        sbm_graph_free(g);
    }
}

#[test]
fn baselines_through_the_abi() {
    let g = graph(300, 3, 0.3, 0.02);
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(sbm_run_spectral(g, 1, &mut r), SbmStatus::Ok);
        assert!(sbm_result_nmi(r) > 0.9);
        let mut u = vec![0.0; 300];
        assert_eq!(sbm_result_membership(r, u.as_mut_ptr(), 300), SbmStatus::Unavailable);
        assert!(last_error().contains("spectral"));
        sbm_result_free(r);

        assert_eq!(sbm_run_bp(g, 0.3, 0.02, 1, &mut r), SbmStatus::Ok);
        assert!(sbm_result_nmi(r) > 0.9);
        sbm_result_free(r);

        let opts = sbm_vips_options_default(0.3, 0.02);
        assert_eq!(sbm_run_vips(g, &opts, 1, 2, &mut r), SbmStatus::InvalidArgument);
        assert!(last_error().contains("two-class"));
        sbm_graph_free(g);
    }
}

#[test]
fn mfvi_with_parameter_updates() {
    let g = graph(400, 2, 0.2, 0.05);
    unsafe {
        let mut opts = sbm_vips_options_default(0.15, 0.07);
        opts.update_params = true;
        opts.param_update_start = 9;
        opts.init_mu = 0.5;
        let mut r = ptr::null_mut();
        assert_eq!(sbm_run_mfvi(g, &opts, 4, &mut r), SbmStatus::Ok);
        let (mut p, mut q) = (0.0, 0.0);
        sbm_result_params(r, &mut p, &mut q);
        assert!(p != 0.15 && q != 0.07);
        sbm_result_free(r);
        sbm_graph_free(g);
    }
}

#[test]
fn graph_from_edges_and_labels() {
    let edges: [u32; 6] = [0, 1, 2, 3, 1, 2];
    let labels: [u32; 4] = [0, 0, 1, 1];
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(sbm_graph_from_edges(4, 2, edges.as_ptr(), 3, labels.as_ptr(), &mut g), SbmStatus::Ok);
        assert_eq!(sbm_graph_edge_count(g), 3);
        let mut back = [9u32; 4];
        assert_eq!(sbm_graph_labels(g, back.as_mut_ptr(), 4), SbmStatus::Ok);
        assert_eq!(back, labels);
        assert_eq!(sbm_graph_labels(g, back.as_mut_ptr(), 3), SbmStatus::InvalidArgument);
        sbm_graph_free(g);

        let bad: [u32; 2] = [0, 7];
        let mut g = ptr::null_mut();
        assert_eq!(sbm_graph_from_edges(4, 2, bad.as_ptr(), 1, labels.as_ptr(), &mut g), SbmStatus::InvalidArgument);
        assert!(g.is_null());
    }
}

#[test]
fn errors_and_null_handles() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(sbm_graph_generate(10, 2, 1.5, 0.1, 0, &mut g), SbmStatus::InvalidArgument);
        assert!(g.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(sbm_graph_generate(10, 2, 0.5, 0.1, 0, ptr::null_mut()), SbmStatus::NullPointer);

        let opts = sbm_vips_options_default(0.2, 0.1);
        let mut r = ptr::null_mut();
        assert_eq!(sbm_run_vips(ptr::null(), &opts, 0, 0, &mut r), SbmStatus::NullPointer);
        assert_eq!(last_error(), "graph is null");
        assert!(sbm_result_nmi(ptr::null()).is_nan());
        assert_eq!(sbm_graph_node_count(ptr::null()), 0);
        sbm_graph_free(ptr::null_mut());
        sbm_result_free(ptr::null_mut());

        let g = graph(20, 2, 0.5, 0.1);
        let mut bad = opts;
        bad.q_hat = 0.0;
        assert_eq!(sbm_run_vips(g, &bad, 0, 0, &mut r), SbmStatus::InvalidArgument);
        assert!(last_error().contains("q_hat"));
        sbm_graph_free(g);
    }
    let v = unsafe { CStr::from_ptr(sbm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
