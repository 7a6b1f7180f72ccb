// Pure presentation helpers, kept DOM-free so they are trivially testable.

// One-decimal percent, e.g. 0.423 -> "42.3%".
export function percent(p: number): string {
  return `${(p * 100).toFixed(1)}%`;
}

// Percent strings for a distribution, adjusted so the displayed values sum
// to exactly 100.0: the largest entry absorbs the rounding residue.
export function percentRow(dist: number[]): string[] {
  const tenths = dist.map((p) => Math.round(p * 1000));
  const residue = 1000 - tenths.reduce((a, b) => a + b, 0);
  if (dist.length > 0) {
    let argmax = 0;
    for (let i = 1; i < dist.length; i++) {
      if (dist[i] > dist[argmax]) argmax = i;
    }
    tenths[argmax] += residue;
  }
  return tenths.map((t) => `${(t / 10).toFixed(1)}%`);
}

export function progressText(answered: number, total: number): string {
  return `Item ${Math.min(answered + 1, total)} of ${total}`;
}
