//! Diagram pictures. Standalone SVG, data flowing top to bottom: the frame
//! is a dashed box, transistors are rectangles stacked by how many
//! transistors feed them from above, wires are cubic curves that keep the
//! left-to-right order of every face they touch. Purely presentational.

use std::collections::BTreeMap;
use std::fmt::Write;

use bdg_core::diagram::{Attachment, Diagram, TransistorId};

const SLOT: f64 = 48.0; // horizontal pitch per frame contact
const GAP_X: f64 = 28.0; // minimum gap between transistors in a row
const TR_H: f64 = 34.0; // transistor height
const ROW_GAP: f64 = 80.0; // vertical clearance between layers
const MARGIN: f64 = 36.0;

/// Placed transistor: left edge, top edge, width.
type Placement = BTreeMap<TransistorId, (f64, f64, f64)>;

pub fn to_svg(d: &Diagram) -> String {
    let depth = layer_depths(d);
    let row_count = depth.values().max().map_or(0, |m| m + 1);
    let mut rows: Vec<Vec<TransistorId>> = vec![Vec::new(); row_count];
    for (&t, &k) in &depth {
        rows[k].push(t);
    }

    let frame_top_y = MARGIN + 24.0;
    let frame_bottom_y = frame_top_y + ROW_GAP + row_count as f64 * (TR_H + ROW_GAP);
    let row_y = |k: usize| frame_top_y + ROW_GAP + k as f64 * (TR_H + ROW_GAP);

    let ft_w = SLOT * d.frame_top().len() as f64;
    let fb_w = SLOT * d.frame_bottom().len() as f64;

    // First pass pins the frame top at the left edge just to measure the
    // content; the second centres the frame over that width.
    let trial = pack(d, &rows, row_y, 0.0);
    let content_w = extent(&trial).max(ft_w).max(fb_w);
    let frame_top_x = (content_w - ft_w) / 2.0;
    let pos = pack(d, &rows, row_y, frame_top_x);
    let content_w = extent(&pos).max(frame_top_x + ft_w).max(fb_w);
    let frame_bottom_x = (content_w - fb_w) / 2.0;

    let total_w = content_w + 2.0 * MARGIN;
    let total_h = frame_bottom_y + 24.0 + MARGIN;
    let x = |v: f64| v + MARGIN;

    let top_anchor = |wire| -> (f64, f64) {
        match d.top_attachment(wire).expect("wire has a top contact") {
            Attachment::FrameTop { slot } => {
                (frame_top_x + SLOT * (slot as f64 + 0.5), frame_top_y)
            }
            Attachment::TransistorBottom { transistor, slot } => {
                let (tx, ty, tw) = pos[&transistor];
                let n = d.transistor(transistor).unwrap().bottom_face().len();
                (tx + tw * (slot as f64 + 0.5) / n as f64, ty + TR_H)
            }
            _ => unreachable!("top contact sits on a frame top or a transistor bottom"),
        }
    };
    let bottom_anchor = |wire| -> (f64, f64) {
        match d.bottom_attachment(wire).expect("wire has a bottom contact") {
            Attachment::FrameBottom { slot } => {
                (frame_bottom_x + SLOT * (slot as f64 + 0.5), frame_bottom_y)
            }
            Attachment::TransistorTop { transistor, slot } => {
                let (tx, ty, tw) = pos[&transistor];
                let n = d.transistor(transistor).unwrap().top_face().len();
                (tx + tw * (slot as f64 + 0.5) / n as f64, ty)
            }
            _ => unreachable!("bottom contact sits on a frame bottom or a transistor top"),
        }
    };

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{total_w:.1}\" height=\"{total_h:.1}\" \
         viewBox=\"0 0 {total_w:.1} {total_h:.1}\">\n\
         <style>text {{ font-family: ui-monospace, Menlo, Consolas, monospace; }}</style>\n\
         <rect width=\"{total_w:.1}\" height=\"{total_h:.1}\" fill=\"#ffffff\"/>\n"
    );
    let _ = write!(
        svg,
        "<rect x=\"{:.1}\" y=\"{frame_top_y:.1}\" width=\"{:.1}\" height=\"{:.1}\" \
         fill=\"none\" stroke=\"#9a9a9a\" stroke-dasharray=\"6 5\"/>\n",
        x(-18.0),
        content_w + 36.0,
        frame_bottom_y - frame_top_y,
    );

    for (id, label) in d.wires() {
        let (x1, y1) = top_anchor(id);
        let (x2, y2) = bottom_anchor(id);
        let pull = ((y2 - y1) / 2.0).clamp(18.0, 60.0);
        let _ = write!(
            svg,
            "<path d=\"M {:.1} {y1:.1} C {:.1} {:.1}, {:.1} {:.1}, {:.1} {y2:.1}\" \
             fill=\"none\" stroke=\"#33415c\" stroke-width=\"1.6\"><title>w{id}: {label}</title></path>\n",
            x(x1),
            x(x1),
            y1 + pull,
            x(x2),
            y2 - pull,
            x(x2),
        );
        let _ = write!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" fill=\"#555555\">{label}</text>\n",
            x((x1 + x2) / 2.0) + 5.0,
            (y1 + y2) / 2.0 - 4.0,
        );
    }

    for (&t, &(tx, ty, tw)) in &pos {
        let _ = write!(
            svg,
            "<rect x=\"{:.1}\" y=\"{ty:.1}\" width=\"{tw:.1}\" height=\"{TR_H:.1}\" rx=\"6\" \
             fill=\"#e8eefb\" stroke=\"#33415c\" stroke-width=\"1.4\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" fill=\"#1c2438\" \
             text-anchor=\"middle\">t{t}</text>\n",
            x(tx),
            x(tx + tw / 2.0),
            ty + TR_H / 2.0 + 4.0,
        );
    }

    svg.push_str("</svg>\n");
    svg
}

/// Layer of each transistor: 0 for those fed only by the frame top, else one
/// more than the deepest transistor feeding them. Terminates because wires
/// flow strictly downward in a valid diagram.
fn layer_depths(d: &Diagram) -> BTreeMap<TransistorId, usize> {
    let mut depth: BTreeMap<TransistorId, usize> =
        d.transistors().map(|(t, _)| (t, 0)).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for (t, tr) in d.transistors() {
            let mut need = 0;
            for &w in tr.top_face() {
                if let Some(Attachment::TransistorBottom { transistor, .. }) = d.top_attachment(w)
                {
                    need = need.max(depth[&transistor] + 1);
                }
            }
            if need > depth[&t] {
                depth.insert(t, need);
                changed = true;
            }
        }
    }
    depth
}

/// Packs each row left to right. A transistor asks to sit centred under the
/// mean of its top contacts (all placed in earlier rows or on the frame) and
/// is pushed right just enough to clear its neighbour.
fn pack(
    d: &Diagram,
    rows: &[Vec<TransistorId>],
    row_y: impl Fn(usize) -> f64,
    frame_top_x: f64,
) -> Placement {
    let mut pos = Placement::new();
    for (k, row) in rows.iter().enumerate() {
        let mut desired: Vec<(f64, TransistorId)> = row
            .iter()
            .map(|&t| {
                let face = d.transistor(t).unwrap().top_face();
                let sum: f64 = face
                    .iter()
                    .map(|&w| match d.top_attachment(w).expect("wire has a top contact") {
                        Attachment::FrameTop { slot } => frame_top_x + SLOT * (slot as f64 + 0.5),
                        Attachment::TransistorBottom { transistor, slot } => {
                            let (tx, _, tw) = pos[&transistor];
                            let n = d.transistor(transistor).unwrap().bottom_face().len();
                            tx + tw * (slot as f64 + 0.5) / n as f64
                        }
                        _ => unreachable!("top contact is a frame top or transistor bottom"),
                    })
                    .sum();
                (sum / face.len() as f64, t)
            })
            .collect();
        desired.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut cursor = 0.0;
        for (centre, t) in desired {
            let tr = d.transistor(t).unwrap();
            let w = SLOT * tr.top_face().len().max(tr.bottom_face().len()) as f64;
            let left = (centre - w / 2.0).max(cursor);
            pos.insert(t, (left, row_y(k), w));
            cursor = left + w + GAP_X;
        }
    }
    pos
}

fn extent(pos: &Placement) -> f64 {
    pos.values().map(|&(x, _, w)| x + w).fold(0.0, f64::max)
}
