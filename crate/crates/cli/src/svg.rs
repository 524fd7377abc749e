use std::fmt::Write;

use fractal_steiner::fractal::EmbeddedTree;
use fractal_steiner::Point;

/// Pixels per unit length.
pub const SCALE: f64 = 500.0;
/// Margin as a fraction of the larger side of the bounding box.
pub const MARGIN: f64 = 0.05;

/// One `<line>` per edge, a dot on the root and on every leaf, and the
/// x-axis dashed when `axis` is set. Output depends only on the tree.
pub fn render(tree: &EmbeddedTree, axis: bool) -> String {
    let v = &tree.vertices;
    let (mut lo, mut hi) = (v[0], v[0]);
    for p in v {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y);
    let m = if span > 0.0 { MARGIN * span } else { MARGIN };
    let width = (hi.x - lo.x + 2.0 * m) * SCALE;
    let height = (hi.y - lo.y + 2.0 * m) * SCALE;
    let map = |p: Point| ((p.x - lo.x + m) * SCALE, (hi.y - p.y + m) * SCALE);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.6}" height="{height:.6}" viewBox="0 0 {width:.6} {height:.6}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if axis {
        let (_, y) = map(Point::ORIGIN);
        let _ = writeln!(
            s,
            r##"<path d="M 0 {y:.6} H {width:.6}" stroke="#999999" stroke-dasharray="6 4" fill="none"/>"##
        );
    }
    let _ = writeln!(
        s,
        r#"<g stroke="black" stroke-width="1" stroke-linecap="round">"#
    );
    for &(a, b) in &tree.edges {
        let (x1, y1) = map(v[a]);
        let (x2, y2) = map(v[b]);
        let _ = writeln!(
            s,
            r#"<line x1="{x1:.6}" y1="{y1:.6}" x2="{x2:.6}" y2="{y2:.6}"/>"#
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r##"<g fill="#c0392b">"##);
    for p in std::iter::once(v[0]).chain(tree.leaves()) {
        let (x, y) = map(p);
        let _ = writeln!(s, r#"<circle cx="{x:.6}" cy="{y:.6}" r="2"/>"#);
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}
