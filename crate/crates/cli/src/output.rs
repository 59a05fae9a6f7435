use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Output of one command: the echoed configuration plus either a single
/// record or a table.
pub struct Doc {
    pub command: &'static str,
    pub config: Value,
    pub body: Body,
}

pub enum Body {
    Record(Value),
    Table { header: Vec<String>, rows: Vec<Vec<Value>>, json_key: &'static str },
}

impl Doc {
    pub fn record<T: Serialize>(command: &'static str, config: Value, result: &T) -> Doc {
        Doc { command, config, body: Body::Record(to_value(result)) }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.render_json(),
            Format::Csv => self.render_csv(),
        }
    }

    fn render_json(&self) -> String {
        let mut top = Map::new();
        top.insert("command".into(), Value::from(self.command));
        top.insert("config".into(), self.config.clone());
        match &self.body {
            Body::Record(Value::Object(m)) => top.extend(m.clone()),
            Body::Record(v) => {
                top.insert("result".into(), v.clone());
            }
            Body::Table { header, rows, json_key } => {
                let rows = rows
                    .iter()
                    .map(|r| Value::Object(header.iter().cloned().zip(r.iter().cloned()).collect()))
                    .collect();
                top.insert((*json_key).into(), Value::Array(rows));
            }
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("json renders");
        s.push('\n');
        s
    }

    fn render_csv(&self) -> String {
        let mut out = format!("# command: {}\n# config: {}\n", self.command, self.config);
        let (header, rows) = match &self.body {
            Body::Record(v) => {
                let mut flat = Vec::new();
                flatten("", v, &mut flat);
                let (h, r): (Vec<String>, Vec<Value>) = flat.into_iter().unzip();
                (h, vec![r])
            }
            Body::Table { header, rows, .. } => (header.clone(), rows.clone()),
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&header).expect("csv writes to memory");
        for r in rows {
            w.write_record(r.iter().map(cell)).expect("csv writes to memory");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8"));
        out
    }
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, Value)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        _ => out.push((if prefix.is_empty() { "value".into() } else { prefix.into() }, v.clone())),
    }
}

/// Scalars as plain text, arrays joined by `;`, null as empty.
pub fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(cell).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

/// Number cell; non-finite values become strings so JSON stays valid.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::from(x.to_string())
    }
}
