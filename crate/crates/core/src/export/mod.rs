//! Skeleton WSDL, WS-BPEL and WS-CDL documents for AB-WSCL definitions.

mod bpel;
mod cdl;
mod wsdl;
pub mod xml;

pub use bpel::export_bpel;
pub use cdl::export_cdl;
pub use wsdl::export_wsdl;
pub use xml::{Element, Node, XmlSkeleton};

use thiserror::Error;

use crate::dsl::{Action, BehaviorDefinition, TypeName};
use crate::term::ActorKind;

pub const DEFAULT_BASE_URI: &str = "http://example.wscs.com/2011";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportOptions {
    pub base_uri: String,
}

impl Default for ExportOptions {
    fn default() -> Self {
        ExportOptions { base_uri: DEFAULT_BASE_URI.to_string() }
    }
}

impl ExportOptions {
    fn wsdl_ns(&self, stem: &str) -> String {
        format!("{}/wsdl/{stem}.wsdl", self.base_uri)
    }

    fn schema_ns(&self, stem: &str) -> String {
        format!("{}/schemas/{stem}.xsd", self.base_uri)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExportError {
    #[error("`{0}` is not a WS")]
    NotAWS(String),
    #[error("`{0}` is not a WSO")]
    NotAWSO(String),
    #[error("`{0}` is not a WSC")]
    NotAWSC(String),
    #[error("{behavior} declares {found} role(s), expected 2")]
    RoleCountMismatch { behavior: String, found: usize },
}

/// A generated document plus anything worth telling the user about it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exported {
    pub doc: XmlSkeleton,
    pub diagnostics: Vec<String>,
}

impl Exported {
    pub fn to_xml(&self) -> String {
        self.doc.to_xml()
    }
}

/// `UserAgentWS` -> `UserAgent`.
pub fn stem(name: &str) -> &str {
    for suffix in ["WSO", "WSC", "WS", "AA"] {
        if let Some(s) = name.strip_suffix(suffix) {
            if !s.is_empty() {
                return s;
            }
        }
    }
    name
}

/// `requestLB` -> `RequestLB`.
pub fn cap(s: &str) -> String {
    let mut cs = s.chars();
    match cs.next() {
        Some(c) => c.to_uppercase().chain(cs).collect(),
        None => String::new(),
    }
}

fn xs_type(ty: Option<TypeName>) -> &'static str {
    match ty {
        Some(TypeName::Int) => "xs:int",
        Some(TypeName::Float) => "xs:float",
        Some(TypeName::Str) => "xs:string",
        Some(TypeName::Bool) => "xs:boolean",
        _ => "xs:anyType",
    }
}

/// A send found in a body.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct SendSite<'d> {
    /// Declaring method, `None` for the initializer.
    from: Option<&'d str>,
    method: &'d str,
    arity: usize,
}

/// Sends in `def` whose target has static kind `kind`, in body order.
fn sends_to(def: &BehaviorDefinition, kind: ActorKind) -> Vec<SendSite<'_>> {
    let mut out = Vec::new();
    for m in def.all_bodies() {
        let from = def.init.as_ref().filter(|i| std::ptr::eq(*i, m)).map_or(Some(m.name.as_str()), |_| None);
        for a in &m.body {
            if let Action::Send { target, method, args, .. } = a {
                if def.type_of(Some(m), target).and_then(|t| t.actor_kind()) == Some(kind) {
                    out.push(SendSite { from, method, arity: args.len() });
                }
            }
        }
    }
    out
}
