// Keyboard layout for the review loop. Adjudication is a high-volume
// task, so everything common sits on single unmodified keys: up/down
// walks clusters, left/right picks the representative, y confirms,
// n rejects.

export type Command =
  | "prev-cluster"
  | "next-cluster"
  | "prev-member"
  | "next-member"
  | "confirm-duplicates"
  | "mark-distinct"
  | "toggle-pending"
  | "open-image"
  | "close-overlay"
  | "page-back"
  | "page-forward"
  | "refresh";

export interface KeyStroke {
  key: string;
  ctrlKey?: boolean;
  metaKey?: boolean;
  altKey?: boolean;
  /** True while focus is in a text field; suppresses everything but Escape. */
  editing?: boolean;
}

export function commandFor(stroke: KeyStroke): Command | null {
  if (stroke.ctrlKey || stroke.metaKey || stroke.altKey) {
    return null;
  }
  if (stroke.editing) {
    return stroke.key === "Escape" ? "close-overlay" : null;
  }
  switch (stroke.key) {
    case "ArrowUp":
    case "k":
      return "prev-cluster";
    case "ArrowDown":
    case "j":
      return "next-cluster";
    case "ArrowLeft":
    case "h":
      return "prev-member";
    case "ArrowRight":
    case "l":
      return "next-member";
    case "y":
    case "Y":
      return "confirm-duplicates";
    case "n":
    case "N":
      return "mark-distinct";
    case "p":
    case "P":
      return "toggle-pending";
    case "Enter":
    case "o":
      return "open-image";
    case "Escape":
      return "close-overlay";
    case "PageUp":
      return "page-back";
    case "PageDown":
      return "page-forward";
    case "r":
      return "refresh";
    default:
      return null;
  }
}
