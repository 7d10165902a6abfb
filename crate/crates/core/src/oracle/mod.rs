//! Brute-force partition function evaluators used as ground truth.

pub mod face;
pub mod vertex;

pub use face::{
    face_creation_operator, face_one_row_monodromy, partition_face_route, FaceCreation, FaceRowMonodromy,
    FACE_ROUTE_MAX_N,
};
pub use vertex::{
    double_row_monodromy, exchange_residual, partition_bruteforce, partition_bruteforce_spread,
    partition_bruteforce_with_states, partition_enumeration, partition_enumeration_with_states, BRUTEFORCE_MAX_N,
    DENSE_MAX_N, ENUMERATION_MAX_N,
};
