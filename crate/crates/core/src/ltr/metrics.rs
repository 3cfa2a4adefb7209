/// How equal scores are ordered when computing a ranking metric.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TiePolicy {
    /// ties keep input order
    Stable,
    /// ties put lower labels first
    Pessimistic,
}

fn gain(label: f64) -> f64 {
    label.exp2() - 1.0
}

/// DCG@k of labels listed in ranked order.
pub fn dcg_at(labels: &[f64], k: usize) -> f64 {
    labels
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, &l)| gain(l) / ((i + 2) as f64).log2())
        .sum()
}

/// NDCG@k of a scored list; `None` when the ideal DCG is zero.
pub fn ndcg_at(scores: &[f64], labels: &[f64], k: usize, ties: TiePolicy) -> Option<f64> {
    let mut ideal: Vec<f64> = labels.to_vec();
    ideal.sort_by(|a, b| b.total_cmp(a));
    let idcg = dcg_at(&ideal, k);
    if idcg <= 0.0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        let o = scores[b].total_cmp(&scores[a]);
        match ties {
            TiePolicy::Stable => o.then(a.cmp(&b)),
            TiePolicy::Pessimistic => o.then(labels[a].total_cmp(&labels[b])).then(a.cmp(&b)),
        }
    });
    let ranked: Vec<f64> = order.iter().map(|&i| labels[i]).collect();
    Some(dcg_at(&ranked, k) / idcg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_dcg() {
        // gains 1, 0, 0.5 at positions 1..3
        let d = dcg_at(&[1.0, 0.0, 1.5f64.log2()], 3);
        assert!((d - (1.0 + 0.5 / 2.0)).abs() < 1e-12);
        assert_eq!(ndcg_at(&[2.0, 1.0], &[1.0, 0.0], 10, TiePolicy::Stable), Some(1.0));
        let rev = ndcg_at(&[1.0, 2.0], &[1.0, 0.0], 10, TiePolicy::Stable).unwrap();
        assert!((rev - 1.0 / 3f64.log2()).abs() < 1e-12);
        assert_eq!(ndcg_at(&[0.0, 0.0], &[0.0, 0.0], 10, TiePolicy::Stable), None);
        let tie = ndcg_at(&[0.0, 0.0], &[1.0, 0.0], 10, TiePolicy::Pessimistic).unwrap();
        assert!((tie - rev).abs() < 1e-15);
    }
}
