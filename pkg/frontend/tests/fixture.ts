/** Deterministic CSV fixtures for the integration tests. */

/**
 * 48 variant rows with three well-separated numeric lumps: 24 ancestral
 * rows, then two derived groups of 12. Values are index arithmetic, so
 * the file is byte-identical between runs.
 */
export function gwasCsv(): string {
  const lines = ["snp_id,anc_or_der,chromosome,region,avg_risk_allele,expression"];
  for (let i = 0; i < 24; i++) {
    const risk = (0.18 + (i % 6) * 0.01).toFixed(2);
    const expr = (0.9 + (i % 5) * 0.05).toFixed(2);
    lines.push(`rs${i + 1},ANC,${(i % 3) + 1},conserved,${risk},${expr}`);
  }
  for (let i = 24; i < 36; i++) {
    const risk = (0.6 + (i % 4) * 0.01).toFixed(2);
    const expr = (4.0 + (i % 4) * 0.08).toFixed(2);
    lines.push(`rs${i + 1},DER,${(i % 3) + 9},regulatory,${risk},${expr}`);
  }
  for (let i = 36; i < 48; i++) {
    const risk = (0.86 + (i % 4) * 0.01).toFixed(2);
    const expr = (7.8 + (i % 4) * 0.08).toFixed(2);
    lines.push(`rs${i + 1},DER,${(i % 3) + 17},coding,${risk},${expr}`);
  }
  return lines.join("\n") + "\n";
}

/** Ids of the ancestral rows in gwasCsv, in row order. */
export const GWAS_ANC_IDS = Array.from({ length: 24 }, (_, i) => i);

/** 36 rows in three tight planted blobs over two numeric features. */
export function blobsCsv(): string {
  const centers: Array<[number, number]> = [
    [0, 0],
    [6, 0.5],
    [3, 7],
  ];
  const lines = ["f0,f1"];
  for (const [cx, cy] of centers) {
    for (let j = 0; j < 12; j++) {
      const dx = ((j % 5) - 2) * 0.12;
      const dy = ((j % 3) - 1) * 0.15;
      lines.push(`${(cx + dx).toFixed(2)},${(cy + dy).toFixed(2)}`);
    }
  }
  return lines.join("\n") + "\n";
}
