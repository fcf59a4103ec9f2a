use std::collections::BTreeMap;
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Element(Element),
    Text(String),
    Comment(String),
}

/// An XML element. Attributes (namespace bindings included) are kept sorted
/// so output is stable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub name: String,
    pub attrs: BTreeMap<String, String>,
    pub children: Vec<Node>,
}

impl Element {
    pub fn new(name: impl Into<String>) -> Self {
        Element { name: name.into(), attrs: BTreeMap::new(), children: Vec::new() }
    }

    pub fn attr(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.attrs.insert(key.into(), value.into());
        self
    }

    pub fn child(mut self, e: Element) -> Self {
        self.children.push(Node::Element(e));
        self
    }

    pub fn text(mut self, t: impl Into<String>) -> Self {
        self.children.push(Node::Text(t.into()));
        self
    }

    pub fn comment(mut self, t: impl Into<String>) -> Self {
        self.children.push(Node::Comment(t.into()));
        self
    }

    pub fn push(&mut self, e: Element) {
        self.children.push(Node::Element(e));
    }

    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        self.children.iter().filter_map(|n| match n {
            Node::Element(e) => Some(e),
            _ => None,
        })
    }

    /// Every descendant element (and self) in document order.
    pub fn descendants(&self) -> Vec<&Element> {
        let mut out = vec![self];
        for e in self.elements() {
            out.extend(e.descendants());
        }
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        let pad = "  ".repeat(indent);
        write!(out, "{pad}<{}", self.name).unwrap();
        for (k, v) in &self.attrs {
            write!(out, " {k}=\"{}\"", escape(v, true)).unwrap();
        }
        if self.children.is_empty() {
            out.push_str("/>\n");
            return;
        }
        if let [Node::Text(t)] = self.children.as_slice() {
            writeln!(out, ">{}</{}>", escape(t, false), self.name).unwrap();
            return;
        }
        out.push_str(">\n");
        for c in &self.children {
            match c {
                Node::Element(e) => e.write(out, indent + 1),
                Node::Text(t) => writeln!(out, "{pad}  {}", escape(t, false)).unwrap(),
                Node::Comment(t) => writeln!(out, "{pad}  <!--{}-->", t.replace("--", "- -")).unwrap(),
            }
        }
        writeln!(out, "{pad}</{}>", self.name).unwrap();
    }
}

/// A complete document: declaration plus one root element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XmlSkeleton {
    pub root: Element,
}

impl XmlSkeleton {
    pub fn to_xml(&self) -> String {
        let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        self.root.write(&mut out, 0);
        out
    }
}

fn escape(s: &str, attr: bool) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' if attr => out.push_str("&quot;"),
            _ => out.push(ch),
        }
    }
    out
}
