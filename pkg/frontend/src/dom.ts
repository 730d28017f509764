/** Minimal DOM mounting for the node tree; full re-render on each state
 * change (the console is a single-operator tool, not a rendering
 * benchmark). */

import type { VNode } from "./view.js";

export function toElement(node: VNode | string, doc: Document): Node {
  if (typeof node === "string") return doc.createTextNode(node);
  const element = doc.createElement(node.tag);
  for (const [name, value] of Object.entries(node.attrs)) {
    if (name === "checked" || name === "disabled") {
      if (value) element.setAttribute(name, value);
    } else if (name === "value") {
      (element as HTMLInputElement).value = value;
      element.setAttribute(name, value);
    } else {
      element.setAttribute(name, value);
    }
  }
  for (const [eventName, handler] of Object.entries(node.on ?? {})) {
    element.addEventListener(eventName, handler);
  }
  for (const child of node.children) {
    element.appendChild(toElement(child, doc));
  }
  return element;
}

export function mount(root: HTMLElement, tree: VNode): void {
  root.replaceChildren(toElement(tree, root.ownerDocument));
}
