//! JSON documents with numbers in the fixed scientific format. Fields are
//! serialized in declaration order, which is the documented key order.

use qtransduce::format::sci;
use serde::Serialize;
use serde_json::value::RawValue;

pub(crate) type Num = Box<RawValue>;

/// Non-finite values have no JSON spelling and become `null`.
pub(crate) fn num(x: f64) -> Num {
    let text = if x.is_finite() { sci(x) } else { "null".to_owned() };
    RawValue::from_string(text).expect("formatted float is a JSON number")
}

pub(crate) fn render<T: Serialize>(doc: &T) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("document serializes");
    text.push('\n');
    text
}
