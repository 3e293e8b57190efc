// Cluster colors keyed by the server's color_tag. The first cluster a
// user creates lands on tag 0, so red comes first.
const PALETTE = [
  "#d62728", // red
  "#1f77b4", // blue
  "#9467bd", // purple
  "#e6b91e", // yellow
  "#2ca02c", // green
  "#ff7f0e", // orange
  "#17becf", // teal
  "#8c564b", // brown
  "#e377c2", // pink
  "#7f7f7f", // gray
];

export function colorFor(tag: number): string {
  return PALETTE[((tag % PALETTE.length) + PALETTE.length) % PALETTE.length]!;
}

export const UNCLUSTERED_COLOR = "#c7c7c7";
