#![allow(unused_imports)]
pub(crate) use crate::geometry::Vec3;
pub(crate) use crate::C64;
pub(crate) use alloc::format;
pub(crate) use alloc::string::String;
pub(crate) use alloc::vec;
pub(crate) use alloc::vec::Vec;
pub(crate) use num_traits::Float;
