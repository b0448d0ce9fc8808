pub mod analyze;
pub mod extractor;
pub mod smallspace;
pub mod sumset;

use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::{CmdResult, Failure};

pub fn parse<T: DeserializeOwned>(config: &Value) -> CmdResult<T> {
    T::deserialize(config).map_err(|e| Failure::Config(format!("schema: {e}")))
}

pub fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}
