//! Minimal SVG 1.1 writer. Every number is printed with two decimals, and
//! non-finite values are written as 0 so the document always parses.

use std::fmt::Write;

pub fn num(v: f64) -> String {
    let v = if v.is_finite() { v } else { 0.0 };
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

pub struct Svg {
    buf: String,
    depth: usize,
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        let mut buf = String::new();
        buf.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(
            buf,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">",
            w = num(width),
            h = num(height)
        );
        let mut svg = Self { buf, depth: 0 };
        svg.rect(0.0, 0.0, width, height, "#ffffff", None);
        svg
    }

    pub fn group(&mut self, id: &str) {
        let _ = writeln!(self.buf, "<g id=\"{}\">", escape(id));
        self.depth += 1;
    }

    pub fn end_group(&mut self) {
        assert!(self.depth > 0, "unbalanced group");
        self.buf.push_str("</g>\n");
        self.depth -= 1;
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, class: Option<&str>) {
        let class = class.map(|c| format!(" class=\"{}\"", escape(c))).unwrap_or_default();
        let _ = writeln!(
            self.buf,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"{class}/>",
            num(x),
            num(y),
            num(w.max(0.0)),
            num(h.max(0.0)),
            escape(fill)
        );
    }

    pub fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        let _ = writeln!(
            self.buf,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"{}\"/>",
            num(x1),
            num(y1),
            num(x2),
            num(y2),
            escape(stroke),
            num(width)
        );
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, width: f64, class: Option<&str>) {
        let pts: Vec<String> = points
            .iter()
            .map(|(x, y)| format!("{},{}", num(*x), num(*y)))
            .collect();
        let class = class.map(|c| format!(" class=\"{}\"", escape(c))).unwrap_or_default();
        let _ = writeln!(
            self.buf,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"{class}/>",
            pts.join(" "),
            escape(stroke),
            num(width)
        );
    }

    pub fn path(&mut self, d: &str, stroke: &str, width: f64) {
        let _ = writeln!(
            self.buf,
            "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"/>",
            escape(d),
            escape(stroke),
            num(width)
        );
    }

    pub fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str, class: Option<&str>) {
        let class = class.map(|c| format!(" class=\"{}\"", escape(c))).unwrap_or_default();
        let _ = writeln!(
            self.buf,
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\"{class}/>",
            num(cx),
            num(cy),
            num(r),
            escape(fill)
        );
    }

    pub fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, content: &str) {
        let _ = writeln!(
            self.buf,
            "<text x=\"{}\" y=\"{}\" font-size=\"{}\" text-anchor=\"{}\">{}</text>",
            num(x),
            num(y),
            num(size),
            anchor,
            escape(content)
        );
    }

    pub fn finish(mut self) -> String {
        while self.depth > 0 {
            self.end_group();
        }
        self.buf.push_str("</svg>\n");
        self.buf
    }
}
