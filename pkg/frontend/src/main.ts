import { boot } from "./app";

const params = new URLSearchParams(window.location.search);
const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app container");
}
boot(root, {
  userId: params.get("user") ?? "learner-1",
  courseId: params.get("course") ?? "neuro-demo",
});
