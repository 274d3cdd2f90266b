use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use topocl_ffi::*;

fn last_error() -> String {
    let p = topocl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

/// K4 with distinct weights: three births, three deaths.
fn k4() -> *mut TopoclGraph {
    let src = [0usize, 0, 0, 1, 1, 2];
    let dst = [1usize, 2, 3, 2, 3, 3];
    let w = [0.9, 0.1, 0.5, 0.7, 0.3, 0.2];
    let mut g = ptr::null_mut();
    let s = unsafe { topocl_graph_new(4, src.as_ptr(), dst.as_ptr(), w.as_ptr(), 6, &mut g) };
    assert_eq!(s, TopoclStatus::Ok);
    g
}

#[test]
fn decompose_and_read_back() {
    unsafe {
        let g = k4();
        assert_eq!(topocl_graph_edge_count(g), 6);
        let mut d = ptr::null_mut();
        assert_eq!(topocl_decompose(g, &mut d), TopoclStatus::Ok);
        assert!(topocl_last_error().is_null());
        assert_eq!((topocl_descriptor_birth_count(d), topocl_descriptor_death_count(d)), (3, 3));

        let (mut vals, mut ids) = ([0.0; 3], [0usize; 3]);
        assert_eq!(topocl_descriptor_births(d, vals.as_mut_ptr(), ids.as_mut_ptr(), 3), TopoclStatus::Ok);
        assert_eq!(vals, [0.5, 0.7, 0.9]);
        assert_eq!(ids, [2, 3, 0]);
        assert_eq!(topocl_descriptor_deaths(d, vals.as_mut_ptr(), ptr::null_mut(), 3), TopoclStatus::Ok);
        assert_eq!(vals, [0.1, 0.2, 0.3]);
        assert_eq!(topocl_descriptor_deaths(d, vals.as_mut_ptr(), ptr::null_mut(), 2), TopoclStatus::BufferTooSmall);

        let target = [0.0, 0.2, 0.5];
        let mut grad = [f64::NAN; 6];
        assert_eq!(topocl_gradient(d, target.as_ptr(), 3, grad.as_mut_ptr(), 6), TopoclStatus::Ok);
        let expected = [0.0, 0.2, 0.0, 0.0, -0.4, 0.0];
        for (a, b) in grad.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{grad:?}");
        }
        assert_eq!(topocl_gradient(d, target.as_ptr(), 2, grad.as_mut_ptr(), 6), TopoclStatus::CardinalityMismatch);

        topocl_descriptor_free(d);
        topocl_graph_free(g);
    }
}

#[test]
fn errors_are_reported_not_raised() {
    unsafe {
        let mut g = ptr::null_mut();
        let (src, dst, w) = ([0usize], [1usize], [1.0]);
        assert_eq!(topocl_graph_new(3, src.as_ptr(), dst.as_ptr(), w.as_ptr(), 1, &mut g), TopoclStatus::DisconnectedGraph);
        assert!(g.is_null());
        assert!(last_error().contains("disconnected"));
        assert_eq!(topocl_graph_new(2, src.as_ptr(), src.as_ptr(), w.as_ptr(), 1, &mut g), TopoclStatus::InvalidArgument);
        assert!(last_error().contains("self-loop"));

        let mut d = ptr::null_mut();
        assert_eq!(topocl_graph_new(2, ptr::null(), dst.as_ptr(), w.as_ptr(), 1, &mut g), TopoclStatus::NullPointer);
        assert_eq!(last_error(), "src is null");
        assert_eq!(topocl_decompose(ptr::null(), &mut d), TopoclStatus::NullPointer);
        let mut out = 0.0;
        assert_eq!(topocl_distance(ptr::null(), ptr::null(), 0, &mut out), TopoclStatus::Ok);
        assert_eq!(out, 0.0);

        // Freeing null is a no-op.
        topocl_graph_free(ptr::null_mut());
        topocl_descriptor_free(ptr::null_mut());
        topocl_mlp_free(ptr::null_mut());
        assert_eq!(topocl_graph_edge_count(ptr::null()), 0);
    }
}

#[test]
fn distance_and_barycenters() {
    unsafe {
        let (a, b) = ([0.0, 1.0, 2.0], [1.0, 1.0, 4.0]);
        let mut d = 0.0;
        assert_eq!(topocl_distance(a.as_ptr(), b.as_ptr(), 3, &mut d), TopoclStatus::Ok);
        assert!((d - 5.0).abs() < 1e-12);

        let sets = [0.0, 1.0, 2.0, 1.0, 1.0, 4.0];
        let weights = [0.25, 0.75];
        let mut bary = [0.0; 3];
        assert_eq!(topocl_barycenter(sets.as_ptr(), 2, 3, weights.as_ptr(), bary.as_mut_ptr()), TopoclStatus::Ok);
        assert_eq!(bary, [0.75, 1.0, 3.5]);

        let mut online = [0.0; 3];
        assert_eq!(
            topocl_barycenter_update(a.as_ptr(), b.as_ptr(), 3, 1.0, 3.0, online.as_mut_ptr()),
            TopoclStatus::Ok
        );
        assert_eq!(online, bary);
        assert_eq!(
            topocl_barycenter_update(a.as_ptr(), b.as_ptr(), 3, 0.0, 3.0, online.as_mut_ptr()),
            TopoclStatus::InvalidArgument
        );
    }
}

#[test]
fn mlp_predict_save_load() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("net.bin").to_str().unwrap()).unwrap();
    unsafe {
        let sizes = [4usize, 6, 3];
        let mut net = ptr::null_mut();
        assert_eq!(topocl_mlp_new(sizes.as_ptr(), 3, 11, &mut net), TopoclStatus::Ok);
        assert_eq!((topocl_mlp_input_dim(net), topocl_mlp_output_dim(net)), (4, 3));
        let xs: Vec<f32> = (0..20).map(|i| (i as f32 * 0.37).sin()).collect();
        let mut first = [usize::MAX; 5];
        assert_eq!(topocl_mlp_predict(net, xs.as_ptr(), 5, first.as_mut_ptr()), TopoclStatus::Ok);
        assert!(first.iter().all(|&y| y < 3));

        assert_eq!(topocl_mlp_save(net, path.as_ptr()), TopoclStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(topocl_mlp_load(path.as_ptr(), &mut back), TopoclStatus::Ok);
        let mut second = [usize::MAX; 5];
        assert_eq!(topocl_mlp_predict(back, xs.as_ptr(), 5, second.as_mut_ptr()), TopoclStatus::Ok);
        assert_eq!(first, second);

        let missing = CString::new(dir.path().join("nope.bin").to_str().unwrap()).unwrap();
        let mut none = ptr::null_mut();
        assert_eq!(topocl_mlp_load(missing.as_ptr(), &mut none), TopoclStatus::Io);
        let empty = [0usize; 0];
        assert_eq!(topocl_mlp_new(empty.as_ptr(), 0, 0, &mut none), TopoclStatus::InvalidArgument);

        topocl_mlp_free(net);
        topocl_mlp_free(back);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/topocl.h")).unwrap();
    let source = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 18);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct TopoclGraph TopoclGraph;"));
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "topocl.h"

int main(void) {
    size_t src[] = {0, 0, 1};
    size_t dst[] = {1, 2, 2};
    double w[] = {0.3, 0.2, 0.9};
    TopoclGraph *g = NULL;
    TopoclDescriptor *d = NULL;
    if (topocl_graph_new(3, src, dst, w, 3, &g) != TOPOCL_STATUS_OK) return 1;
    if (topocl_decompose(g, &d) != TOPOCL_STATUS_OK) return 2;
    double death = 0.0;
    if (topocl_descriptor_deaths(d, &death, NULL, 1) != TOPOCL_STATUS_OK) return 3;
    if (topocl_decompose(NULL, &d) != TOPOCL_STATUS_NULL_POINTER) return 4;
    printf("%.1f %s\n", death, topocl_last_error());
    topocl_descriptor_free(d);
    topocl_graph_free(g);
    return 0;
}
"#;

/// Compiles a small C program against the header and the shared library.
#[test]
fn c_program_links_against_the_library() {
    let Ok(exe) = std::env::current_exe() else { return };
    // target/<profile>/deps/<test> -> target/<profile>
    let lib_dir: PathBuf = exe.parent().and_then(|p| p.parent()).unwrap().to_path_buf();
    if !lib_dir.join("libtopocl_ffi.so").exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or shared library");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let bin = dir.path().join("smoke");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let status = Command::new("cc")
        .args(["-Wall", "-Werror", "-o"])
        .arg(&bin)
        .arg(&src)
        .arg(format!("-I{}/include", env!("CARGO_MANIFEST_DIR")))
        .arg(format!("-L{}", lib_dir.display()))
        .arg("-ltopocl_ffi")
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).env("LD_LIBRARY_PATH", &lib_dir).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "0.2 graph is null\n");
}
