//! Reconstruction of curves and surfaces from point clouds by fitting randomly
//! initialized neural parameterizations, together with the limiting
//! Gaussian-process kernels of wide random networks.
//!
//! * [`nn`]: layers, initialization, backprop and Adam.
//! * [`geometry`]: point clouds, meshes, Chamfer distance, k-d tree, normals,
//!   marching cubes, procedural shapes and file formats.
//! * [`priors`]: chart atlases and level-set fitting.
//! * [`gp`]: analytic kernels, Monte-Carlo checks and curvature statistics.

pub mod nn;
pub mod geometry;
pub mod priors;
pub mod gp;
