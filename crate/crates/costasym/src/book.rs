//! Doctest anchor for the guide: each chapter of `book/` is included as a
//! hidden item so its code blocks compile and run under `cargo test`. A
//! snippet that drifts from the library fails the build, keeping the guide
//! and the crate in lockstep.

#[doc = include_str!("../../../book/src/introduction.md")]
struct Introduction;

#[doc = include_str!("../../../book/src/corpora.md")]
struct Corpora;

#[doc = include_str!("../../../book/src/schedules.md")]
struct Schedules;

#[doc = include_str!("../../../book/src/attacker-utility.md")]
struct AttackerUtility;

#[doc = include_str!("../../../book/src/best-response.md")]
struct BestResponses;

#[doc = include_str!("../../../book/src/defender.md")]
struct Defender;

#[doc = include_str!("../../../book/src/authsim.md")]
struct AuthSim;

#[doc = include_str!("../../../book/src/experiments.md")]
struct Experiments;
