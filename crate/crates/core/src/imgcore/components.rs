//! Connected components, small-object removal and hole filling.

use super::{BinaryMask, LabelMap};

/// Label 8-connected foreground components. Labels are assigned 1..=K in
/// row-major order of first encounter, which downstream tie-breaks rely on.
pub fn connected_components(m: &BinaryMask) -> LabelMap {
    let (w, h) = (m.width(), m.height());
    let src = m.data();
    let mut labels = vec![0u32; w * h];
    let mut sizes = Vec::new();
    let mut queue: Vec<usize> = Vec::new();

    for start in 0..w * h {
        if !src[start] || labels[start] != 0 {
            continue;
        }
        let label = sizes.len() as u32 + 1;
        let mut size = 0usize;
        labels[start] = label;
        queue.clear();
        queue.push(start);
        while let Some(idx) = queue.pop() {
            size += 1;
            let x = idx % w;
            let y = idx / w;
            let x0 = x.saturating_sub(1);
            let x1 = (x + 1).min(w - 1);
            let y0 = y.saturating_sub(1);
            let y1 = (y + 1).min(h - 1);
            for ny in y0..=y1 {
                for nx in x0..=x1 {
                    let nidx = ny * w + nx;
                    if src[nidx] && labels[nidx] == 0 {
                        labels[nidx] = label;
                        queue.push(nidx);
                    }
                }
            }
        }
        sizes.push(size);
    }

    LabelMap::new(w, h, labels, sizes)
}

/// Clear every component whose pixel count is strictly below `min_size`.
pub fn remove_small_objects(m: &BinaryMask, min_size: usize) -> BinaryMask {
    if min_size == 0 {
        return m.clone();
    }
    let lm = connected_components(m);
    let keep: Vec<u32> = (1..=lm.num_components() as u32)
        .filter(|&l| lm.size_of(l) >= min_size)
        .collect();
    lm.mask_of_labels(&keep)
}

/// Fill enclosed background: every background region not 4-connected to the
/// image border becomes foreground.
pub fn fill_holes(m: &BinaryMask) -> BinaryMask {
    let (w, h) = (m.width(), m.height());
    if w == 0 || h == 0 {
        return m.clone();
    }
    let src = m.data();
    let mut outside = vec![false; w * h];
    let mut queue: Vec<usize> = Vec::new();

    let seed = |idx: usize, outside: &mut [bool], queue: &mut Vec<usize>| {
        if !src[idx] && !outside[idx] {
            outside[idx] = true;
            queue.push(idx);
        }
    };
    for x in 0..w {
        seed(x, &mut outside, &mut queue);
        seed((h - 1) * w + x, &mut outside, &mut queue);
    }
    for y in 0..h {
        seed(y * w, &mut outside, &mut queue);
        seed(y * w + w - 1, &mut outside, &mut queue);
    }

    // Background flood uses 4-connectivity, the dual of 8-connected foreground.
    while let Some(idx) = queue.pop() {
        let x = idx % w;
        let y = idx / w;
        if x > 0 {
            seed(idx - 1, &mut outside, &mut queue);
        }
        if x + 1 < w {
            seed(idx + 1, &mut outside, &mut queue);
        }
        if y > 0 {
            seed(idx - w, &mut outside, &mut queue);
        }
        if y + 1 < h {
            seed(idx + w, &mut outside, &mut queue);
        }
    }

    BinaryMask::from_vec(w, h, outside.iter().map(|&o| !o).collect()).expect("same dims")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask_from_rows(rows: &[&str]) -> BinaryMask {
        let h = rows.len();
        let w = rows[0].len();
        BinaryMask::from_fn(w, h, |x, y| rows[y].as_bytes()[x] == b'x')
    }

    #[test]
    fn two_disjoint_blobs() {
        let m = mask_from_rows(&[
            "xx...",
            "xx...",
            ".....",
            "...xx",
            "...xx",
        ]);
        let lm = connected_components(&m);
        assert_eq!(lm.num_components(), 2);
        assert_eq!(lm.size_of(1), 4);
        assert_eq!(lm.size_of(2), 4);
    }

    #[test]
    fn diagonal_touch_is_one_component() {
        let m = mask_from_rows(&["x.", ".x"]);
        let lm = connected_components(&m);
        assert_eq!(lm.num_components(), 1);
        assert_eq!(lm.size_of(1), 2);
    }

    #[test]
    fn empty_mask_has_no_components() {
        let m = BinaryMask::new(4, 4);
        assert_eq!(connected_components(&m).num_components(), 0);
    }

    #[test]
    fn remove_small_keeps_exactly_at_threshold() {
        // 299-pixel component dropped at min_size=300; 300-pixel kept.
        let m299 = BinaryMask::from_fn(23, 13, |x, y| y * 23 + x < 299);
        assert!(remove_small_objects(&m299, 300).is_empty());
        let m300 = BinaryMask::from_fn(20, 15, |_, _| true);
        assert_eq!(remove_small_objects(&m300, 300).count_foreground(), 300);
    }

    #[test]
    fn remove_small_on_empty_mask() {
        let m = BinaryMask::new(8, 8);
        assert!(remove_small_objects(&m, 300).is_empty());
    }

    #[test]
    fn fill_ring_to_disk() {
        let m = mask_from_rows(&[
            ".....",
            ".xxx.",
            ".x.x.",
            ".xxx.",
            ".....",
        ]);
        let filled = fill_holes(&m);
        assert!(filled.get(2, 2));
        assert_eq!(filled.count_foreground(), 9);
    }

    #[test]
    fn fill_solid_block_unchanged() {
        let m = mask_from_rows(&["xxx", "xxx"]);
        assert_eq!(fill_holes(&m), m);
    }

    #[test]
    fn fill_c_shape_open_to_border_unchanged() {
        let m = mask_from_rows(&[
            "xxx",
            "x..",
            "xxx",
        ]);
        assert_eq!(fill_holes(&m), m);
    }

    #[test]
    fn fill_holes_idempotent() {
        let mut state = 0x13579bdfu32;
        let m = BinaryMask::from_fn(24, 24, |_, _| {
            state = state.wrapping_mul(1664525).wrapping_add(1013904223);
            state & 0x8000 != 0
        });
        let once = fill_holes(&m);
        let twice = fill_holes(&once);
        assert_eq!(once, twice);
    }
}
