use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <math.h>
#include "hystera.h"

int main(void) {
    HysteraParams p;
    if (hystera_default_params(&p) != HYSTERA_STATUS_OK) return 10;
    p.n_rho = 512;
    HysteraConstitutive *c = NULL;
    if (hystera_constitutive_new(&p, &c) != HYSTERA_STATUS_OK) return 11;
    double pc = 0.0;
    if (hystera_pc_eval(c, HYSTERA_BRANCH_DRAINAGE, 0.5, &pc) != HYSTERA_STATUS_OK) return 12;
    if (fabs(pc - 2.0 * sqrt(3.0)) > 1e-12) return 13;
    if (hystera_pc_eval(c, HYSTERA_BRANCH_DRAINAGE, 0.0, &pc) != HYSTERA_STATUS_DOMAIN) return 14;
    if (hystera_last_error()[0] == '\0') return 15;

    enum { N = 11 };
    double u[N], v[N];
    for (int k = 0; k < N; ++k)
        if (hystera_band_state(c, 0.4 + 0.02 * k, 0.5, &u[k], &v[k]) != HYSTERA_STATUS_OK) return 16;
    HysteraStepperConfig cfg;
    hystera_default_stepper_config(&cfg);
    cfg.dt = 0.05;
    cfg.t_final = 0.5;
    HysteraGridSpec g = {1.0, 0.0, N, 0};
    HysteraSimulation *sim = NULL;
    if (hystera_simulation_new(c, &g, &cfg, u, v, N, &sim) != HYSTERA_STATUS_OK) return 17;
    hystera_constitutive_free(c);
    if (hystera_simulation_run(sim) != HYSTERA_STATUS_OK) return 18;
    size_t levels = 0;
    hystera_simulation_levels(sim, &levels);
    HysteraLedger l;
    hystera_simulation_ledger(sim, &l);
    printf("levels=%zu A=%g B=%g\n", levels, l.a, l.b);
    hystera_simulation_free(sim);
    return levels == 11 ? 0 : 19;
}
"#;

fn target_dir() -> PathBuf {
    // <target>/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

fn compiler() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc).arg("--version").output().ok().filter(|o| o.status.success()).map(|_| cc)
}

#[test]
fn c_program_links_against_static_library() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let lib = target_dir().join("libhystera_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let exe = dir.path().join("smoke");
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("levels=11"));
}
