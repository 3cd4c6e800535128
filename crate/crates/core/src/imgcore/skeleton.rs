//! Iterative thinning to a one-pixel-wide skeleton.
//!
//! Two-subiteration Zhang-Suen thinning runs to fixpoint, then a cleanup pass
//! removes any remaining 2x2 foreground quads (the classic fixpoint artifact
//! at diagonal junction pads), and components the parallel rule erased
//! entirely (isolated 2x2 squares die in one step) are restored as single
//! pixels. The output is always a subset of the input and contains no 2x2
//! all-foreground block.

use super::{connected_components, BinaryMask};

pub fn skeletonize(m: &BinaryMask) -> BinaryMask {
    let mut sk = m.clone();
    if m.width() < 1 || m.height() < 1 {
        return sk;
    }
    zhang_suen(&mut sk);
    clear_quads(&mut sk);
    restore_vanished(m, &mut sk);
    sk
}

// Ring neighborhood in Zhang-Suen order P2..P9 (clockwise from north).
const RING: [(isize, isize); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

#[inline]
fn ring_values(mask: &BinaryMask, x: isize, y: isize) -> [bool; 8] {
    let mut v = [false; 8];
    for (i, (dx, dy)) in RING.iter().enumerate() {
        v[i] = mask.get_checked(x + dx, y + dy);
    }
    v
}

#[inline]
fn transitions(v: &[bool; 8]) -> u32 {
    let mut count = 0;
    for i in 0..8 {
        if !v[i] && v[(i + 1) % 8] {
            count += 1;
        }
    }
    count
}

#[inline]
fn neighbor_count(v: &[bool; 8]) -> u32 {
    v.iter().map(|&b| b as u32).sum()
}

fn zhang_suen(mask: &mut BinaryMask) {
    let w = mask.width();
    let mut active: Vec<u32> = (0..mask.data().len())
        .filter(|&i| mask.data()[i])
        .map(|i| i as u32)
        .collect();
    let mut to_delete: Vec<u32> = Vec::new();

    loop {
        let mut deleted = 0usize;
        for phase in 0..2 {
            to_delete.clear();
            for &idx in &active {
                let i = idx as usize;
                if !mask.data()[i] {
                    continue;
                }
                let x = (i % w) as isize;
                let y = (i / w) as isize;
                let v = ring_values(mask, x, y);
                let b = neighbor_count(&v);
                if !(2..=6).contains(&b) || transitions(&v) != 1 {
                    continue;
                }
                // v indices: 0=P2(N), 2=P4(E), 4=P6(S), 6=P8(W)
                let ok = if phase == 0 {
                    !(v[0] && v[2] && v[4]) && !(v[2] && v[4] && v[6])
                } else {
                    !(v[0] && v[2] && v[6]) && !(v[0] && v[4] && v[6])
                };
                if ok {
                    to_delete.push(idx);
                }
            }
            for &idx in &to_delete {
                mask.data_mut()[idx as usize] = false;
            }
            deleted += to_delete.len();
        }
        if deleted == 0 {
            break;
        }
        active.retain(|&idx| mask.data()[idx as usize]);
    }
}

/// Remove remaining 2x2 all-foreground quads. Deletion never grows the mask,
/// so a forward scan suffices; for each quad we try, in order: a pixel whose
/// ring neighbors form a single arc (locally safe), a pixel whose removal
/// keeps the global component count, an adjacent endpoint whose removal
/// unblocks the quad, and only then a forced deletion.
fn clear_quads(mask: &mut BinaryMask) {
    let (w, h) = (mask.width(), mask.height());
    if w < 2 || h < 2 {
        return;
    }
    let mut y = 0usize;
    while y + 1 < h {
        let mut x = 0usize;
        while x + 1 < w {
            while quad_at(mask, x, y) {
                resolve_quad(mask, x, y);
            }
            x += 1;
        }
        y += 1;
    }
}

#[inline]
fn quad_at(mask: &BinaryMask, x: usize, y: usize) -> bool {
    mask.get(x, y) && mask.get(x + 1, y) && mask.get(x, y + 1) && mask.get(x + 1, y + 1)
}

fn resolve_quad(mask: &mut BinaryMask, x: usize, y: usize) {
    let candidates = [(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)];

    for &(px, py) in &candidates {
        let v = ring_values(mask, px as isize, py as isize);
        if transitions(&v) == 1 {
            mask.set(px, py, false);
            return;
        }
    }

    let base = connected_components(mask).num_components();
    for &(px, py) in &candidates {
        mask.set(px, py, false);
        if connected_components(mask).num_components() == base {
            return;
        }
        mask.set(px, py, true);
    }

    for &(px, py) in &candidates {
        for (dx, dy) in RING {
            let qx = px as isize + dx;
            let qy = py as isize + dy;
            if mask.get_checked(qx, qy) {
                let v = ring_values(mask, qx, qy);
                if neighbor_count(&v) == 1 {
                    mask.set(qx as usize, qy as usize, false);
                    return;
                }
            }
        }
    }

    mask.set(x, y, false);
}

/// Restore one representative pixel for every input component that lost all
/// of its pixels during thinning.
fn restore_vanished(input: &BinaryMask, sk: &mut BinaryMask) {
    let lm = connected_components(input);
    let k = lm.num_components();
    if k == 0 {
        return;
    }
    let mut survived = vec![false; k + 1];
    for (i, &l) in lm.labels().iter().enumerate() {
        if l != 0 && sk.data()[i] {
            survived[l as usize] = true;
        }
    }
    if survived[1..].iter().all(|&s| s) {
        return;
    }

    let w = lm.width();
    let mut sum_x = vec![0f64; k + 1];
    let mut sum_y = vec![0f64; k + 1];
    for (i, &l) in lm.labels().iter().enumerate() {
        if l != 0 && !survived[l as usize] {
            sum_x[l as usize] += (i % w) as f64;
            sum_y[l as usize] += (i / w) as f64;
        }
    }
    // Pixel of the vanished component closest to its centroid, scan order
    // breaking ties.
    let mut best: Vec<Option<(f64, usize)>> = vec![None; k + 1];
    for (i, &l) in lm.labels().iter().enumerate() {
        let li = l as usize;
        if l == 0 || survived[li] {
            continue;
        }
        let n = lm.size_of(l) as f64;
        let cx = sum_x[li] / n;
        let cy = sum_y[li] / n;
        let dx = (i % w) as f64 - cx;
        let dy = (i / w) as f64 - cy;
        let d2 = dx * dx + dy * dy;
        match best[li] {
            Some((bd, _)) if bd <= d2 => {}
            _ => best[li] = Some((d2, i)),
        }
    }
    for entry in best.iter().flatten() {
        sk.data_mut()[entry.1] = true;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn has_quad(m: &BinaryMask) -> bool {
        for y in 0..m.height().saturating_sub(1) {
            for x in 0..m.width().saturating_sub(1) {
                if quad_at(m, x, y) {
                    return true;
                }
            }
        }
        false
    }

    #[test]
    fn thin_line_unchanged() {
        let m = BinaryMask::from_fn(10, 5, |x, y| y == 2 && (1..9).contains(&x));
        assert_eq!(skeletonize(&m), m);
    }

    #[test]
    fn solid_bar_thins_to_path_preserving_components() {
        let m = BinaryMask::from_fn(24, 9, |x, y| (2..22).contains(&x) && (2..7).contains(&y));
        let sk = skeletonize(&m);
        assert!(!sk.is_empty());
        assert!(sk.is_subset_of(&m));
        assert!(!has_quad(&sk));
        assert_eq!(connected_components(&m).num_components(), 1);
        assert_eq!(connected_components(&sk).num_components(), 1);
        // Roughly one pixel per column through the middle of the bar.
        let fg = sk.count_foreground();
        assert!(fg <= 2 * 20, "bar should thin to ~1px path, got {fg}");
    }

    #[test]
    fn isolated_square_survives_as_single_pixel() {
        // Plain Zhang-Suen erases an isolated 2x2 block entirely; the restore
        // step must keep one pixel so the component count is preserved.
        let m = BinaryMask::from_fn(6, 6, |x, y| (2..4).contains(&x) && (2..4).contains(&y));
        let sk = skeletonize(&m);
        assert_eq!(sk.count_foreground(), 1);
        assert!(sk.is_subset_of(&m));
    }

    #[test]
    fn diagonal_junction_pad_loses_quad() {
        // Two diagonals crossing through a 2x2 pad: a Zhang-Suen fixpoint that
        // still contains a quad. Cleanup must remove it.
        let rows = [
            "x....x",
            ".x..x.",
            "..xx..",
            "..xx..",
            ".x..x.",
            "x....x",
        ];
        let m = BinaryMask::from_fn(6, 6, |x, y| rows[y].as_bytes()[x] == b'x');
        let sk = skeletonize(&m);
        assert!(!has_quad(&sk));
        assert!(sk.is_subset_of(&m));
    }

    #[test]
    fn no_quads_on_pseudo_random_masks() {
        let mut state = 0x9e3779b9u32;
        for trial in 0..30 {
            let m = BinaryMask::from_fn(32, 32, |_, _| {
                state = state.wrapping_mul(1664525).wrapping_add(1013904223 + trial);
                state & 0x4000 != 0
            });
            let sk = skeletonize(&m);
            assert!(!has_quad(&sk), "trial {trial}");
            assert!(sk.is_subset_of(&m), "trial {trial}");
        }
    }

    #[test]
    fn blob_union_preserves_component_count() {
        // Unions of solid rectangles: realistic blob inputs for which thinning
        // must not change the number of components.
        let mut state = 0xabcdef01u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for trial in 0..20 {
            let mut m = BinaryMask::new(48, 48);
            for _ in 0..4 {
                let x0 = (next() % 40) as usize;
                let y0 = (next() % 40) as usize;
                let rw = 2 + (next() % 8) as usize;
                let rh = 2 + (next() % 8) as usize;
                for y in y0..(y0 + rh).min(48) {
                    for x in x0..(x0 + rw).min(48) {
                        m.set(x, y, true);
                    }
                }
            }
            let before = connected_components(&m).num_components();
            let sk = skeletonize(&m);
            let after = connected_components(&sk).num_components();
            assert_eq!(before, after, "trial {trial}");
            assert!(!has_quad(&sk), "trial {trial}");
        }
    }
}
