// SVG drawing of a TreeLayout. Levels grow upward from the token
// baseline; every node and edge carries data attributes so selection,
// confirmation focus, and comparison flashing can address them without
// re-rendering. Visual states (selected, crossing, unreliable,
// discontinuous, flash) are plain CSS classes.

import { LayoutEdge, TreeLayout } from "./layout.js"

const X_STEP = 88
const LEVEL_STEP = 64
const MARGIN_X = 48
const MARGIN_TOP = 28
const POS_GAP = 18
const BASELINE_GAP = 36

export interface RenderOptions {
  selected?: Set<number>
  unreliablePos?: Set<number>
  discontinuous?: Set<number>
  onSelect?: (id: number) => void
}

const SVG_NS = "http://www.w3.org/2000/svg"

function svgElement(name: string, attrs: Record<string, string>): SVGElement {
  const el = document.createElementNS(SVG_NS, name)
  for (const [key, value] of Object.entries(attrs)) el.setAttribute(key, value)
  return el
}

function svgText(x: number, y: number, text: string, cls: string): SVGElement {
  const el = svgElement("text", { x: String(x), y: String(y), class: cls })
  el.textContent = text
  return el
}

export function renderTree(layout: TreeLayout, options: RenderOptions = {}): SVGSVGElement {
  const selected = options.selected ?? new Set<number>()
  const unreliablePos = options.unreliablePos ?? new Set<number>()
  const discontinuous = options.discontinuous ?? new Set<number>()

  let maxX = layout.width - 1
  for (const node of layout.nodes) maxX = Math.max(maxX, node.x)
  const width = 2 * MARGIN_X + maxX * X_STEP
  const baseline = MARGIN_TOP + layout.height * LEVEL_STEP
  const height = baseline + BASELINE_GAP + POS_GAP

  const toX = (x: number) => MARGIN_X + x * X_STEP
  const toY = (level: number) => baseline - level * LEVEL_STEP

  const svg = svgElement("svg", {
    xmlns: SVG_NS,
    viewBox: `0 0 ${width} ${height}`,
    width: String(width),
    height: String(height),
    class: "tree",
  }) as SVGSVGElement

  // tokens anchor at their form text, nonterminals at their level line
  const place = new Map<number, { x: number; y: number }>()
  for (const node of layout.nodes) {
    place.set(node.id, {
      x: toX(node.x),
      y: node.kind === "token" ? baseline + BASELINE_GAP : toY(node.level),
    })
  }

  const drawEdge = (edge: LayoutEdge) => {
    const from = place.get(edge.parent)!
    const to = place.get(edge.child)!
    const line = svgElement("line", {
      x1: String(from.x),
      y1: String(from.y + 6),
      x2: String(to.x),
      y2: String(to.y - 14),
      class: edge.crossing ? "edge crossing" : "edge",
      "data-edge": `${edge.parent}-${edge.child}`,
    })
    svg.append(line)
    const midX = (from.x + to.x) / 2
    const midY = (from.y + to.y) / 2
    svg.append(svgText(midX, midY, edge.label, "edge-label"))
  }
  // crossing edges last so their colour stays visible where lines meet
  for (const edge of layout.edges.filter(e => !e.crossing)) drawEdge(edge)
  for (const edge of layout.edges.filter(e => e.crossing)) drawEdge(edge)

  for (const node of layout.nodes) {
    const { x, y } = place.get(node.id)!
    if (node.kind === "token") {
      const classes = ["token-form"]
      if (selected.has(node.id)) classes.push("selected")
      const form = svgText(x, y, node.text, classes.join(" "))
      form.setAttribute("data-id", String(node.id))
      svg.append(form)
      const posClasses = ["token-pos"]
      if (unreliablePos.has(node.id)) posClasses.push("unreliable")
      svg.append(svgText(x, y + POS_GAP, node.pos ?? "", posClasses.join(" ")))
      if (options.onSelect) {
        form.addEventListener("click", () => options.onSelect!(node.id))
      }
    } else {
      const classes = ["node"]
      if (selected.has(node.id)) classes.push("selected")
      if (discontinuous.has(node.id)) classes.push("discontinuous")
      const label = svgText(x, y, node.text, classes.join(" "))
      label.setAttribute("data-id", String(node.id))
      svg.append(label)
      if (options.onSelect) {
        label.addEventListener("click", () => options.onSelect!(node.id))
      }
    }
  }
  return svg
}

// Briefly pulse the elements for the given ids, used when a comparison
// item is activated.
export function flash(root: ParentNode, ids: Iterable<number>): void {
  for (const id of ids) {
    for (const el of root.querySelectorAll(`[data-id="${id}"]`)) {
      el.classList.remove("flash")
      // the reflow restarts the animation when the class was already present
      void el.getBoundingClientRect()
      el.classList.add("flash")
      setTimeout(() => el.classList.remove("flash"), 1200)
    }
  }
}
