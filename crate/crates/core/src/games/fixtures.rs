//! Small hand-built games used by tests and examples.

use crate::game_tree::{GameTree, NodeSpec, TreeBuilder};

/// Three-card poker: each player antes 1 and gets one of J, Q, K;
/// player 1 checks or bets 1, player 2 responds, player 1 may call a bet
/// after checking. Zero-sum; the game value for player 1 is -1/18.
pub fn kuhn_poker() -> GameTree {
    let cards = ["J", "Q", "K"];
    let mut b = TreeBuilder::new(2);
    let root = b.root(NodeSpec::Chance);
    let show = |c1: usize, c2: usize, pot: f64| {
        if c1 > c2 {
            vec![pot, -pot]
        } else {
            vec![-pot, pot]
        }
    };
    for c1 in 0..3 {
        for c2 in 0..3 {
            if c1 == c2 {
                continue;
            }
            let label = format!("{}{}", cards[c1], cards[c2]);
            let h = b.chance_child(root, &label, 1.0 / 6.0, NodeSpec::decision(1, cards[c1]));
            // check
            let hc = b.child(h, "check", NodeSpec::decision(2, format!("{}-c", cards[c2])));
            b.child(hc, "check", NodeSpec::Terminal(show(c1, c2, 1.0)));
            let hcb = b.child(hc, "bet", NodeSpec::decision(1, format!("{}-cb", cards[c1])));
            b.child(hcb, "fold", NodeSpec::Terminal(vec![-1.0, 1.0]));
            b.child(hcb, "call", NodeSpec::Terminal(show(c1, c2, 2.0)));
            // bet
            let hb = b.child(h, "bet", NodeSpec::decision(2, format!("{}-b", cards[c2])));
            b.child(hb, "fold", NodeSpec::Terminal(vec![1.0, -1.0]));
            b.child(hb, "call", NodeSpec::Terminal(show(c1, c2, 2.0)));
        }
    }
    b.build().expect("kuhn poker is a valid tree")
}

/// Chance picks A (0.4) or B (0.6); player 2 sees it and has 2 actions
/// after A and 3 after B. Hiding B at the root merges both infosets.
pub fn hidden_chance() -> GameTree {
    let mut b = TreeBuilder::new(2);
    let r = b.root(NodeSpec::Chance);
    let a = b.chance_child(r, "A", 0.4, NodeSpec::decision(2, "IA"));
    for (k, x) in ["a", "b"].iter().enumerate() {
        b.child(a, x, NodeSpec::Terminal(vec![k as f64, 1.0]));
    }
    let h = b.chance_child(r, "B", 0.6, NodeSpec::decision(2, "IB"));
    for (k, x) in ["x", "y", "z"].iter().enumerate() {
        b.child(h, x, NodeSpec::Terminal(vec![10.0 + k as f64, 2.0]));
    }
    b.build().expect("fixture is a valid tree")
}
