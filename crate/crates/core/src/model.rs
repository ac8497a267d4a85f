//! JSON model documents built on the expression grammar in [`crate::expr`].
//!
//! Three document kinds share one file format, told apart by `"kind"`:
//!
//! ```json
//! {"kind": "reduced", "q": 1, "m": [2, 3], "g": [["1"], ["sin(x)"]], "r": ["1", "1"],
//!  "chart": {"kind": "circle", "range": [0.0, 6.283185307179586]}}
//! {"kind": "versal", "m": 2, "q": 2, "a": ["eps2 - eps1*cos(x)", "eps1", "eps1*sin(x - pi/4)"]}
//! {"kind": "system", "n": 3, "q": 1, "f": ["..."], "s": ["cos(x)", "sin(x)", "0"]}
//! ```
//!
//! Reduced `g` entries see `eps1..epsq, x, y`; `r` entries see `x, y`;
//! versal `a` entries see `eps1..epsq, x`; system `f` entries see
//! `eps1..epsq, z1..zN`, and `s` entries see `x`.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::deformation::{Component, Fn2, Fn3, ManifoldChart, ReducedFieldModel, VersalFamily};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::lyapunov_schmidt::AmbientSystem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedDoc {
    pub q: usize,
    pub m: [usize; 2],
    pub g: [Vec<String>; 2],
    pub r: [String; 2],
    #[serde(default = "ManifoldChart::circle")]
    pub chart: ManifoldChart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VersalDoc {
    pub m: usize,
    pub q: usize,
    pub a: Vec<String>,
    #[serde(default = "ManifoldChart::circle")]
    pub chart: ManifoldChart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDoc {
    pub n: usize,
    pub q: usize,
    pub f: Vec<String>,
    pub s: Vec<String>,
    #[serde(default = "ManifoldChart::circle")]
    pub chart: ManifoldChart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelDoc {
    Reduced(ReducedDoc),
    Versal(VersalDoc),
    System(SystemDoc),
}

fn eps_names(q: usize) -> Vec<String> {
    (1..=q).map(|i| format!("eps{i}")).collect()
}

fn compile_all(srcs: &[String], names: &[String]) -> Result<Vec<Arc<Expr>>> {
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    srcs.iter()
        .map(|s| Expr::compile(s, &refs).map(Arc::new))
        .collect()
}

impl ModelDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParams(format!("model json: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model documents always serialise")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

impl ReducedDoc {
    pub fn build(&self) -> Result<ReducedFieldModel> {
        let mut gnames = eps_names(self.q);
        gnames.push("x".into());
        gnames.push("y".into());
        let rnames = vec!["x".to_string(), "y".to_string()];
        let mut comps = Vec::with_capacity(2);
        for i in 0..2 {
            if self.g[i].len() != self.q {
                return Err(Error::InvalidParams(format!(
                    "component {} lists {} g expressions, expected q = {}",
                    i + 1,
                    self.g[i].len(),
                    self.q
                )));
            }
            let q = self.q;
            let g: Vec<Fn3> = compile_all(&self.g[i], &gnames)?
                .into_iter()
                .map(|e| {
                    Arc::new(move |eps: &[f64], x: f64, y: f64| {
                        let mut slots = [0.0; 4];
                        slots[..q].copy_from_slice(&eps[..q]);
                        slots[q] = x;
                        slots[q + 1] = y;
                        e.eval(&slots[..q + 2])
                    }) as Fn3
                })
                .collect();
            let re = compile_all(std::slice::from_ref(&self.r[i]), &rnames)?.remove(0);
            let r: Fn2 = Arc::new(move |x, y| re.eval(&[x, y]));
            comps.push(Component { m: self.m[i], g, r });
        }
        let c1 = comps.pop().expect("two components");
        let c0 = comps.pop().expect("two components");
        ReducedFieldModel::new(self.q, [c0, c1], self.chart)
    }
}

impl VersalDoc {
    pub fn build(&self) -> Result<VersalFamily> {
        if self.a.len() != 2 * self.m - 1 {
            return Err(Error::InvalidParams(format!(
                "versal document lists {} parameter expressions, expected {}",
                self.a.len(),
                2 * self.m - 1
            )));
        }
        let mut names = eps_names(self.q);
        names.push("x".into());
        let exprs = compile_all(&self.a, &names)?;
        let q = self.q;
        let map = Arc::new(move |eps: &[f64], x: f64| {
            let mut slots = [0.0; 3];
            slots[..q].copy_from_slice(&eps[..q]);
            slots[q] = x;
            exprs.iter().map(|e| e.eval(&slots[..q + 1])).collect()
        });
        VersalFamily::new(self.m, self.q, self.chart, map)
    }
}

impl SystemDoc {
    pub fn build(&self) -> Result<AmbientSystem> {
        if self.f.len() != self.n || self.s.len() != self.n {
            return Err(Error::InvalidParams(format!(
                "system of dimension {} needs {} field and manifold expressions",
                self.n, self.n
            )));
        }
        let mut names = eps_names(self.q);
        names.extend((1..=self.n).map(|i| format!("z{i}")));
        let fe = compile_all(&self.f, &names)?;
        let se = compile_all(&self.s, &["x".to_string()])?;
        let (q, n) = (self.q, self.n);
        let f = Arc::new(move |eps: &[f64], z: &[f64]| {
            let mut slots = Vec::with_capacity(q + n);
            slots.extend_from_slice(&eps[..q]);
            slots.extend_from_slice(&z[..n]);
            fe.iter().map(|e| e.eval(&slots)).collect::<Vec<f64>>()
        });
        let s = Arc::new(move |x: f64| se.iter().map(|e| e.eval(&[x])).collect::<Vec<f64>>());
        AmbientSystem::new(n, q, f, s, self.chart)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deformation::{eval_reduced_field, Field2};

    const EXAMPLE1: &str = r#"{"kind":"reduced","q":1,"m":[2,3],"g":[["1"],["sin(x)"]],"r":["1","1"],
        "chart":{"kind":"circle","range":[0.0,6.283185307179586]}}"#;

    #[test]
    fn reduced_doc_builds_and_evaluates() {
        let doc = ModelDoc::from_json(EXAMPLE1).unwrap();
        let ModelDoc::Reduced(rd) = &doc else { panic!("wrong kind") };
        let model = rd.build().unwrap();
        let v = eval_reduced_field(&model, &[-0.01], 0.1, 0.1).unwrap();
        assert!(v[0].abs() < 1e-15);
        assert!((v[1] - (-0.01 * 0.1f64.sin() + 0.001)).abs() < 1e-15);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let doc = ModelDoc::Versal(VersalDoc {
            m: 2,
            q: 2,
            a: vec!["eps2 - eps1*cos(x)".into(), "eps1".into(), "eps1*sin(x - pi/4)".into()],
            chart: ManifoldChart::interval(0.1 + 0.2, std::f64::consts::PI / 3.0),
        });
        let text = doc.to_json();
        let back = ModelDoc::from_json(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_json(), text);
        let reparsed = ModelDoc::from_json(EXAMPLE1).unwrap();
        assert_eq!(ModelDoc::from_json(&reparsed.to_json()).unwrap(), reparsed);
    }

    #[test]
    fn versal_doc_matches_closure() {
        let ModelDoc::Versal(vd) = ModelDoc::from_json(
            r#"{"kind":"versal","m":2,"q":2,"a":["eps2 - eps1*cos(x)","eps1","eps1*sin(x - pi/4)"]}"#,
        )
        .unwrap() else {
            panic!()
        };
        let fam = vd.build().unwrap();
        let (e, x, y): ([f64; 2], f64, f64) = ([0.3, -0.2], 1.1, 0.4);
        let a = [e[1] - e[0] * x.cos(), e[0], e[0] * (x - std::f64::consts::FRAC_PI_4).sin()];
        let v = fam.eval(&e, x, y);
        assert!((v[0] - (a[0] + a[1] * y)).abs() < 1e-15);
        assert!((v[1] - (a[2] + y * y)).abs() < 1e-15);
    }

    #[test]
    fn bad_documents_rejected() {
        assert!(ModelDoc::from_json(r#"{"kind":"nope"}"#).is_err());
        let ModelDoc::Versal(vd) =
            ModelDoc::from_json(r#"{"kind":"versal","m":2,"q":1,"a":["eps1","x"]}"#).unwrap()
        else {
            panic!()
        };
        assert!(vd.build().is_err());
        let ModelDoc::Reduced(rd) = ModelDoc::from_json(
            r#"{"kind":"reduced","q":1,"m":[2,2],"g":[["1"],["w"]],"r":["1","1"]}"#,
        )
        .unwrap() else {
            panic!()
        };
        assert!(matches!(rd.build(), Err(Error::Expression(_))));
    }
}
