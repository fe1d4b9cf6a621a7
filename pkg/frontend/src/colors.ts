/** Shared color encodings across the views. */

/** Categorical palette for cluster membership (10-class). */
export const CLUSTER_PALETTE = [
  "#1f77b4",
  "#ff7f0e",
  "#2ca02c",
  "#d62728",
  "#9467bd",
  "#8c564b",
  "#e377c2",
  "#7f7f7f",
  "#bcbd22",
  "#17becf",
];

export const DELTA_INCREASE = "#2ca02c"; // green
export const DELTA_DECREASE = "#d62728"; // red
export const DELTA_NEUTRAL = "#9e9e9e"; // gray

export const CORR_POSITIVE = "#2166ac";
export const CORR_NEGATIVE = "#b2182b";
export const CORR_UNDEFINED = "#bdbdbd";

/** Change magnitudes below this render as "unchanged" (solver noise). */
export const DELTA_EPSILON = 1e-7;

export function clusterColor(label: number | null): string {
  if (label === null || label < 0) return "#444444";
  return CLUSTER_PALETTE[label % CLUSTER_PALETTE.length];
}

export type DeltaKind = "increase" | "decrease" | "neutral";

export function deltaKind(value: number, fixed = false): DeltaKind {
  if (fixed || Math.abs(value) <= DELTA_EPSILON) return "neutral";
  return value > 0 ? "increase" : "decrease";
}

export function deltaColor(value: number, fixed = false): string {
  const kind = deltaKind(value, fixed);
  if (kind === "increase") return DELTA_INCREASE;
  if (kind === "decrease") return DELTA_DECREASE;
  return DELTA_NEUTRAL;
}

/** White-to-blue ramp for heatmap cells; input clamped to [0, 1]. */
export function heatColor(value: number): string {
  const t = Math.max(0, Math.min(1, value));
  const light = Math.round(97 - t * 55); // 97% (near white) .. 42%
  return `hsl(214, 70%, ${light}%)`;
}
