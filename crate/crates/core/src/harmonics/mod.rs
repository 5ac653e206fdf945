//! Spherical-harmonic structure: dimensions, exact bases, zonal kernels and
//! the Laplace–Beltrami action on expansions.

mod basis;
mod dims;
mod zonal;

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

pub use basis::{build_basis, sphere_moment, sphere_moment_avg, HarmonicBasis, MomentTable, BASIS_SIZE_GUARD};
pub use dims::{dim_h, eigenvalue, surface_area, DegreeInfo};
pub use zonal::{zonal_at_one, zonal_value, zonal_values_upto, ZonalKernel};

use crate::expansion::Expansion;
use crate::Result;

type Store<T> = RwLock<HashMap<(usize, usize), Arc<T>>>;

fn basis_store() -> &'static Store<HarmonicBasis> {
    static STORE: OnceLock<Store<HarmonicBasis>> = OnceLock::new();
    STORE.get_or_init(Default::default)
}

fn zonal_store() -> &'static Store<ZonalKernel> {
    static STORE: OnceLock<Store<ZonalKernel>> = OnceLock::new();
    STORE.get_or_init(Default::default)
}

fn cached<T, F: FnOnce() -> Result<T>>(store: &Store<T>, key: (usize, usize), make: F) -> Result<Arc<T>> {
    if let Some(v) = store.read().expect("cache lock").get(&key) {
        return Ok(v.clone());
    }
    let v = Arc::new(make()?);
    Ok(store.write().expect("cache lock").entry(key).or_insert(v).clone())
}

/// Cached [`build_basis`].
pub fn basis(n: usize, j: usize) -> Result<Arc<HarmonicBasis>> {
    cached(basis_store(), (n, j), || build_basis(n, j))
}

/// Cached zonal kernel built from the orthogonal basis.
pub fn zonal(n: usize, j: usize) -> Result<Arc<ZonalKernel>> {
    cached(zonal_store(), (n, j), || ZonalKernel::from_basis(&*basis(n, j)?))
}

/// `Δ^p_{S^{n-1}} e`: each `f_j` multiplied by `(−j(j+n−2))^p`.
pub fn laplace_beltrami_on_expansion(e: &Expansion, p: u32) -> Expansion {
    e.map_degrees(|j| (eigenvalue(e.n, j) as f64).powi(p as i32))
}
