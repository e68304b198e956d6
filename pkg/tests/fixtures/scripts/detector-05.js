setTimeout(function () {
  var unit = document.getElementById("topbanner");
  if (!unit || unit.clientHeight === 1) {
    var box = document.createElement("div");
    box.textContent = "whitelist us please";
    document.body.appendChild(box);
  }
}, 1500);
