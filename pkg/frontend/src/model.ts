/** View models derived from single API responses.
 *
 * One GET produces one ContributionViewModel; nothing in here mutates
 * contribution content or derives values the service did not send.
 */

import type { RecordPayload, SectionPayload, State, TablePayload } from "./api";

export interface TreeNode {
  name: string;
  /** slash-joined path from the root section, used as a stable node id */
  path: string;
  entries: [string, string][];
  children: TreeNode[];
  expanded: boolean;
}

export interface TableView {
  name: string;
  path: string[];
  columns: string[];
  rows: (number | string)[][];
  plottable: boolean;
}

export interface Series {
  name: string;
  values: number[];
}

/** One chart panel: shared x column plus one or more y series. */
export interface SeriesSet {
  name: string;
  path: string[];
  xName: string;
  x: number[];
  series: Series[];
}

export interface ContributionViewModel {
  cid: string;
  name: string;
  identifier: string;
  project: string | null;
  contributor: string;
  state: State;
  revision: number;
  created: number;
  updated: number;
  tree: TreeNode;
  tables: TableView[];
  charts: SeriesSet[];
  mpfile: string;
}

/** Indices of columns whose every cell is numeric.  Empty tables have no
 * numeric columns: there is nothing to plot. */
export function numericColumns(table: TablePayload): number[] {
  if (table.rows.length === 0) return [];
  const out: number[] = [];
  for (let col = 0; col < table.columns.length; col += 1) {
    const numeric = table.rows.every((row) => typeof row[col] === "number");
    if (numeric) out.push(col);
  }
  return out;
}

/** A table charts as line series when it has at least two numeric columns:
 * the first becomes x, the rest become y series. */
export function isPlottable(table: TablePayload): boolean {
  return numericColumns(table).length >= 2;
}

export function seriesSet(name: string, path: string[], table: TablePayload): SeriesSet | null {
  const numeric = numericColumns(table);
  if (numeric.length < 2) return null;
  const [xCol, ...yCols] = numeric as [number, ...number[]];
  return {
    name,
    path,
    xName: table.columns[xCol] ?? "",
    x: table.rows.map((row) => row[xCol] as number),
    series: yCols.map((col) => ({
      name: table.columns[col] ?? "",
      values: table.rows.map((row) => row[col] as number),
    })),
  };
}

export function treeFrom(section: SectionPayload, parentPath = ""): TreeNode {
  const path = parentPath ? `${parentPath}/${section.name}` : section.name;
  return {
    name: section.name,
    path,
    entries: (section.entries ?? []).map(([k, v]) => [k, v]),
    children: (section.children ?? []).map((child) => treeFrom(child, path)),
    expanded: true,
  };
}

/** Every node path in the tree, root included. */
export function treePaths(node: TreeNode): string[] {
  return [node.path, ...node.children.flatMap(treePaths)];
}

export function buildViewModel(record: RecordPayload): ContributionViewModel {
  const tables: TableView[] = [];
  const charts: SeriesSet[] = [];
  for (const [name, ref] of Object.entries(record.tables)) {
    const table: TablePayload = { columns: ref.columns, rows: ref.rows };
    tables.push({
      name,
      path: ref.path,
      columns: ref.columns,
      rows: ref.rows,
      plottable: isPlottable(table),
    });
    const set = seriesSet(name, ref.path, table);
    if (set) charts.push(set);
  }
  return {
    cid: record.cid,
    name: record.name,
    identifier: record.identifier,
    project: record.project,
    contributor: record.contributor,
    state: record.state,
    revision: record.revision,
    created: record.created,
    updated: record.updated,
    tree: treeFrom(record.tree),
    tables,
    charts,
    mpfile: record.mpfile,
  };
}
